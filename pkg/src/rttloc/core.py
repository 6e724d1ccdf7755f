"""Shared domain types, unit conventions, and physical constants.

Unit discipline, used everywhere in this package:

- times are nanoseconds (``*_ns``),
- distances are meters (``*_m``),
- signal strengths are dBm (``*_dbm``),
- frequencies are Hz.

Coordinates live in a local Cartesian meters frame (easting x, northing y);
no geodetic conversions are performed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT_M_PER_S = 299_792_458.0

# Round-trip time per meter of one-way distance: 2/c expressed in ns/m.
# This is the line-of-sight slope of RTT versus distance (~6.6713 ns/m).
ROUND_TRIP_NS_PER_M = 2.0e9 / SPEED_OF_LIGHT_M_PER_S

# Responder turnaround (SIFS-dominated processing) stays inside 8-12 us
# for standards-compliant hardware; solver offsets are constrained to it.
OFFSET_MIN_NS = 8_000.0
OFFSET_MAX_NS = 12_000.0

DEFAULT_CLOCK_HZ = 240e6


def tick_duration_ns(clock_hz: float) -> float:
    """Duration of one counter tick, in ns, for a sniffer clocked at clock_hz."""
    if not clock_hz > 0:
        raise ValueError(f"clock_hz must be positive, got {clock_hz}")
    return 1e9 / clock_hz


def tick_distance_equiv_m(
    clock_hz: float, c_m_per_s: float = SPEED_OF_LIGHT_M_PER_S
) -> float:
    """One-way distance equivalent of one RTT tick, in meters.

    An RTT quantum of one tick corresponds to tick/2 of one-way flight time;
    at 240 MHz this is ~0.625 m. ``c_m_per_s`` is overridable as a test hook.
    """
    if not clock_hz > 0:
        raise ValueError(f"clock_hz must be positive, got {clock_hz}")
    return tick_duration_ns(clock_hz) * 1e-9 * c_m_per_s / 2.0


@dataclass(frozen=True, slots=True)
class Position:
    """A point in the local Cartesian frame (meters)."""

    x_m: float
    y_m: float

    def __post_init__(self):
        if not (math.isfinite(self.x_m) and math.isfinite(self.y_m)):
            raise ValueError(f"position must be finite, got ({self.x_m}, {self.y_m})")

    def distance_to(self, other: "Position") -> float:
        dx = self.x_m - other.x_m
        dy = self.y_m - other.y_m
        return math.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True, slots=True)
class Bounds:
    """Axis-aligned rectangle in meters (the building footprint)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError(f"bounds must have positive area: {self}")

    @property
    def width_x(self) -> float:
        return self.x_max - self.x_min

    @property
    def width_y(self) -> float:
        return self.y_max - self.y_min

    def contains(self, p: Position, margin_m: float = 0.0) -> bool:
        return (
            self.x_min - margin_m <= p.x_m <= self.x_max + margin_m
            and self.y_min - margin_m <= p.y_m <= self.y_max + margin_m
        )

    def translate(self, dx_m: float, dy_m: float) -> "Bounds":
        return Bounds(
            self.x_min + dx_m, self.y_min + dy_m, self.x_max + dx_m, self.y_max + dy_m
        )


@dataclass(frozen=True, slots=True)
class RangingSample:
    """One crowdsourced ranging observation.

    ``position`` is the client's *estimated* location at measurement time
    (GPS outdoors, dead reckoning indoors), not ground truth. ``rtt_ns`` is
    the observed one-way round-trip time, ``rssi_dbm`` the ACK signal
    strength, ``bssid`` the responding radio's identifier.
    """

    position: Position
    rtt_ns: float
    rssi_dbm: float
    bssid: str
    trajectory_id: str
    time_s: float

    def __post_init__(self):
        if not (math.isfinite(self.rtt_ns) and self.rtt_ns > 0):
            raise ValueError(f"rtt_ns must be positive and finite, got {self.rtt_ns}")
        if not self.bssid:
            raise ValueError("bssid must be non-empty")
        if not math.isfinite(self.rssi_dbm):
            raise ValueError(f"rssi_dbm must be finite, got {self.rssi_dbm}")


@dataclass(frozen=True, slots=True)
class ApRecord:
    """A solved anchor: position, processing offset, ranging slope, diagnostics.

    ``offset_ns`` is the responder turnaround delay, constrained to
    [8000, 12000] ns. ``slope_ns_per_m`` is the fitted RTT-versus-distance
    gradient, never below the line-of-sight constant. ``spread_m`` is the
    diameter of the supporting sample positions; ``low_confidence`` marks
    records solved from degenerate geometry.
    """

    bssid: str
    position: Position
    offset_ns: float
    slope_ns_per_m: float
    sample_count: int
    residual_rms_ns: float
    spread_m: float
    low_confidence: bool = False

    def __post_init__(self):
        if not self.bssid:
            raise ValueError("bssid must be non-empty")
        if not OFFSET_MIN_NS <= self.offset_ns <= OFFSET_MAX_NS:
            raise ValueError(
                f"offset_ns {self.offset_ns} outside "
                f"[{OFFSET_MIN_NS}, {OFFSET_MAX_NS}]"
            )
        if self.slope_ns_per_m < ROUND_TRIP_NS_PER_M - 1e-9:
            raise ValueError(
                f"slope_ns_per_m {self.slope_ns_per_m} below line-of-sight "
                f"constant {ROUND_TRIP_NS_PER_M}"
            )
        if self.sample_count < 0:
            raise ValueError("sample_count must be >= 0")
