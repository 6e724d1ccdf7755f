"""Ground-truth worlds: building bounds, walls, anchors, and noise parameters.

A world fixes everything the measurement simulator needs: true anchor
parameters (position, processing offset, NLOS slope, transmit power), wall
segments that attenuate signal and inflate RTT, entrances where pedestrian
traces cross into the building, and the noise/quantization configuration.

Worlds are deterministic functions of their seed. Built-in presets A, B, C,
D1, D2 reproduce the five evaluation floorplan footprints (length x width
and anchor counts) at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..core import (
    DEFAULT_CLOCK_HZ,
    OFFSET_MAX_NS,
    OFFSET_MIN_NS,
    ROUND_TRIP_NS_PER_M,
    Bounds,
    Position,
)
from ..errors import UnknownPresetError, WorldGenerationError


def splitmix64(x: int) -> int:
    """One splitmix64 scramble step; the basis of deterministic seed derivation."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def split_seed(seed: int, ordinal: int) -> int:
    """Independent child seed: the run seed XOR a stream ordinal, hashed.

    Streams with distinct ordinals are independent, so trajectories can be
    generated in parallel without sharing RNG state.
    """
    return splitmix64((seed & 0xFFFFFFFFFFFFFFFF) ^ (ordinal & 0xFFFFFFFFFFFFFFFF))


@dataclass(frozen=True, slots=True)
class Wall:
    """An attenuating segment. Crossing it costs signal strength and adds RTT."""

    x1_m: float
    y1_m: float
    x2_m: float
    y2_m: float
    attenuation_db: float = 3.0
    excess_delay_ns_per_crossing: float = 5.0

    @property
    def p1(self) -> tuple[float, float]:
        return (self.x1_m, self.y1_m)

    @property
    def p2(self) -> tuple[float, float]:
        return (self.x2_m, self.y2_m)


@dataclass(frozen=True, slots=True)
class TrueAp:
    """Ground-truth anchor parameters used by the simulator."""

    bssid: str
    position: Position
    offset_ns: float
    nlos_slope_ns_per_m: float
    tx_rssi_dbm_at_1m: float = -20.0

    def __post_init__(self):
        if not OFFSET_MIN_NS <= self.offset_ns <= OFFSET_MAX_NS:
            raise ValueError(f"offset_ns {self.offset_ns} outside standard range")
        if self.nlos_slope_ns_per_m < ROUND_TRIP_NS_PER_M - 1e-9:
            raise ValueError("nlos slope below line-of-sight constant")


@dataclass(frozen=True, slots=True)
class MeasurementParams:
    """Measurement mechanics: rate, cutoff, clock quantization, noise."""

    rate_hz: float = 30.0
    rssi_cutoff_dbm: float = -60.0
    clock_hz: float = DEFAULT_CLOCK_HZ
    noise_sigma_ns: float = 5.0
    path_loss_exponent: float = 2.5
    nlos_slope_enabled: bool = True   # wall-crossed paths use the anchor's NLOS slope
    wall_excess_enabled: bool = True  # each crossing adds the wall's excess delay

    def __post_init__(self):
        if not self.rate_hz > 0:
            raise ValueError("rate_hz must be positive")
        if self.noise_sigma_ns < 0:
            raise ValueError("noise_sigma_ns must be >= 0")
        if not self.clock_hz > 0:
            raise ValueError("clock_hz must be positive")


@dataclass(frozen=True, slots=True)
class PdrParams:
    """Pedestrian motion and dead-reckoning drift parameters."""

    speed_m_s: float = 1.2
    heading_drift_deg_per_sqrt_m: float = 0.6
    step_scale_sigma: float = 0.01
    gps_sigma_m: float = 1.5
    indoor_truncation_m: float = 70.0

    def __post_init__(self):
        for name in (
            "speed_m_s",
            "heading_drift_deg_per_sqrt_m",
            "step_scale_sigma",
            "gps_sigma_m",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.indoor_truncation_m > 0:
            raise ValueError("indoor_truncation_m must be positive")


@dataclass(frozen=True)
class WorldSpec:
    bounds: Bounds
    walls: tuple[Wall, ...]
    aps: tuple[TrueAp, ...]
    entrances: tuple[Position, ...]
    seed: int
    measurement: MeasurementParams = field(default_factory=MeasurementParams)
    pdr: PdrParams = field(default_factory=PdrParams)
    name: str = "custom"
    # Label of the global (UTM-like) origin this local frame is anchored to;
    # informational only, no geodetic math happens anywhere.
    origin_label: str = ""

    def __post_init__(self):
        bssids = [ap.bssid for ap in self.aps]
        if len(set(bssids)) != len(bssids):
            raise ValueError("anchor bssids must be unique")
        for ap in self.aps:
            if not self.bounds.contains(ap.position):
                raise ValueError(f"anchor {ap.bssid} outside bounds")
        for e in self.entrances:
            if not self.bounds.contains(e, margin_m=1e-9):
                raise ValueError("entrance outside bounds")

    def ap_by_bssid(self, bssid: str) -> TrueAp:
        for ap in self.aps:
            if ap.bssid == bssid:
                return ap
        raise KeyError(bssid)

    def position_plausible(self, p: Position, margin_m: float = 5.0) -> bool:
        """Whether a position lies within the bounds inflated by a margin.

        Sanity gate for positions tied to this world (solved anchors,
        reported fixes); trajectory approaches legitimately start further
        out.
        """
        return self.bounds.contains(p, margin_m)


def _make_bssid(index: int) -> str:
    # Locally-administered MAC-looking identifiers: 02:xx:.. canonical lowercase.
    return f"02:00:00:00:00:{index:02x}"


def generate_world(
    length_m: float,
    width_m: float,
    n_aps: int,
    seed: int,
    walls: tuple[Wall, ...] | list[Wall] | None = None,
    entrances: tuple[Position, ...] | list[Position] | None = None,
    aps: tuple[TrueAp, ...] | list[TrueAp] | None = None,
    measurement: MeasurementParams | None = None,
    pdr: PdrParams | None = None,
    min_separation_m: float = 5.0,
    nlos_slope_range: tuple[float, float] = (1.05, 1.3),
    tx_rssi_dbm_at_1m: float = -20.0,
    name: str = "custom",
) -> WorldSpec:
    """Build a deterministic world for a seed.

    Anchors are either given explicitly or placed uniformly at random within
    the bounds with at least ``min_separation_m`` pairwise spacing (a bounded
    number of rejection retries; failure raises WorldGenerationError).
    Offsets are drawn uniformly over the standard [8, 12] us range and NLOS
    slopes uniformly over ``nlos_slope_range`` times the line-of-sight slope.
    """
    if n_aps < 1 and not aps:
        raise ValueError("need at least one anchor")
    bounds = Bounds(0.0, 0.0, float(length_m), float(width_m))
    rng = np.random.default_rng(split_seed(seed, 0xA9))

    if aps is None:
        margin = min(2.0, length_m / 10, width_m / 10)
        positions: list[Position] = []
        retries = 0
        while len(positions) < n_aps:
            x = rng.uniform(bounds.x_min + margin, bounds.x_max - margin)
            y = rng.uniform(bounds.y_min + margin, bounds.y_max - margin)
            cand = Position(float(x), float(y))
            if all(cand.distance_to(p) >= min_separation_m for p in positions):
                positions.append(cand)
            else:
                retries += 1
                if retries > 200 * n_aps:
                    raise WorldGenerationError(
                        f"could not place {n_aps} anchors with "
                        f"{min_separation_m} m separation in {length_m}x{width_m} m"
                    )
        ap_list = []
        for i, pos in enumerate(positions):
            offset = float(rng.uniform(OFFSET_MIN_NS, OFFSET_MAX_NS))
            slope = float(
                rng.uniform(nlos_slope_range[0], nlos_slope_range[1])
                * ROUND_TRIP_NS_PER_M
            )
            ap_list.append(
                TrueAp(
                    bssid=_make_bssid(i),
                    position=pos,
                    offset_ns=offset,
                    nlos_slope_ns_per_m=slope,
                    tx_rssi_dbm_at_1m=tx_rssi_dbm_at_1m,
                )
            )
        aps = tuple(ap_list)
    else:
        aps = tuple(aps)
        for i, a in enumerate(aps):
            for b in aps[i + 1 :]:
                if a.position.distance_to(b.position) < min_separation_m:
                    raise WorldGenerationError(
                        f"anchors {a.bssid} and {b.bssid} closer than "
                        f"{min_separation_m} m"
                    )

    if entrances is None:
        # One entrance per side; pedestrian traces cycle through them, so
        # coverage reaches both ends of elongated buildings.
        entrances = (
            Position(length_m / 4.0, 0.0),
            Position(3.0 * length_m / 4.0, width_m),
            Position(0.0, width_m / 2.0),
            Position(length_m, width_m / 2.0),
        )
    if walls is None:
        walls = ()

    return WorldSpec(
        bounds=bounds,
        walls=tuple(walls),
        aps=tuple(aps),
        entrances=tuple(entrances),
        seed=seed,
        measurement=measurement or MeasurementParams(),
        pdr=pdr or PdrParams(),
        name=name,
    )


def interior_walls(
    length_m: float,
    width_m: float,
    spacing_m: float = 16.0,
    door_m: float = 2.5,
    attenuation_db: float = 3.0,
    excess_delay_ns: float = 5.0,
) -> tuple[Wall, ...]:
    """Cross-walls perpendicular to the long axis with alternating door gaps.

    A simple corridor-like interior: partitions every ``spacing_m`` along the
    longer dimension, each leaving a door gap at alternating ends, so paths
    along the building cross several walls while staying navigable.
    """
    walls: list[Wall] = []
    along_x = length_m >= width_m
    long_len = length_m if along_x else width_m
    short_len = width_m if along_x else length_m
    n = int(long_len / spacing_m) - 1 if long_len / spacing_m >= 2 else 0
    for k in range(1, n + 1):
        c = k * long_len / (n + 1)
        if k % 2 == 1:
            lo, hi = 0.0, short_len - door_m
        else:
            lo, hi = door_m, short_len
        if along_x:
            walls.append(Wall(c, lo, c, hi, attenuation_db, excess_delay_ns))
        else:
            walls.append(Wall(lo, c, hi, c, attenuation_db, excess_delay_ns))
    return tuple(walls)


# Floorplan footprints (length, width, anchors, trajectories, test points)
# matching the five evaluation scenarios.
_PRESETS: dict[str, tuple[float, float, int, int, int]] = {
    "A": (94.17, 37.40, 9, 10, 11),
    "B": (37.69, 74.78, 8, 9, 10),
    "C": (26.12, 50.49, 8, 9, 6),
    "D1": (30.24, 78.45, 9, 11, 10),
    "D2": (30.24, 78.45, 7, 14, 15),
}

PRESET_NAMES = tuple(_PRESETS)


@dataclass(frozen=True, slots=True)
class PresetInfo:
    name: str
    length_m: float
    width_m: float
    n_aps: int
    n_trajectories: int
    n_test_points: int


def preset_info(name: str) -> PresetInfo:
    if name not in _PRESETS:
        raise UnknownPresetError(name, PRESET_NAMES)
    length_m, width_m, n_aps, n_traj, n_tp = _PRESETS[name]
    return PresetInfo(name, length_m, width_m, n_aps, n_traj, n_tp)


def preset_world(
    name: str,
    seed: int,
    measurement: MeasurementParams | None = None,
    pdr: PdrParams | None = None,
) -> WorldSpec:
    """World for a named floorplan preset; anchor layout varies with the seed."""
    info = preset_info(name)
    walls = interior_walls(info.length_m, info.width_m)
    return generate_world(
        info.length_m,
        info.width_m,
        info.n_aps,
        seed,
        walls=walls,
        measurement=measurement,
        pdr=pdr,
        name=name,
    )


def with_measurement(world: WorldSpec, **overrides) -> WorldSpec:
    """Copy of the world with some measurement parameters replaced."""
    return replace(world, measurement=replace(world.measurement, **overrides))


def with_pdr(world: WorldSpec, **overrides) -> WorldSpec:
    return replace(world, pdr=replace(world.pdr, **overrides))


def entrance_outward_normal(world: WorldSpec, entrance: Position) -> tuple[float, float]:
    """Unit vector pointing out of the building at a boundary entrance."""
    b = world.bounds
    candidates = [
        (abs(entrance.y_m - b.y_min), (0.0, -1.0)),
        (abs(entrance.y_m - b.y_max), (0.0, 1.0)),
        (abs(entrance.x_m - b.x_min), (-1.0, 0.0)),
        (abs(entrance.x_m - b.x_max), (1.0, 0.0)),
    ]
    candidates.sort(key=lambda c: c[0])
    if candidates[0][0] > 1e-6:
        raise ValueError("entrance does not lie on the boundary")
    return candidates[0][1]
