"""Forward ranging models and the squared-residual loss both solvers minimize.

The observed one-way RTT to an anchor is modeled as an affine function of
distance:

    rtt_ns = slope_ns_per_m * d_m + offset_ns

where the line-of-sight slope is the constant 2/c (ROUND_TRIP_NS_PER_M) and
NLOS environments inflate it. The offset is the responder's processing
turnaround. Signal strength never enters the residual; it is carried on
samples for filtering and diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import (
    OFFSET_MAX_NS,
    OFFSET_MIN_NS,
    ROUND_TRIP_NS_PER_M,
    Position,
    RangingSample,
)
from .errors import InvalidTimestampsError


@dataclass(frozen=True, slots=True)
class FtmTimestamps:
    """Timestamp quadruple of one ranging exchange, in nanoseconds.

    t1: initiator send, t2: responder receive, t3: responder send,
    t4: initiator receive. Construction requires t4 > t1; two-sided
    extraction additionally requires t3 >= t2.
    """

    t1_ns: float
    t2_ns: float
    t3_ns: float
    t4_ns: float

    def __post_init__(self):
        if not self.t4_ns > self.t1_ns:
            raise InvalidTimestampsError(
                f"t4 ({self.t4_ns}) must be after t1 ({self.t1_ns})"
            )


@dataclass(frozen=True, slots=True)
class RangingParams:
    """Per-anchor ranging model parameters (offset and slope)."""

    offset_ns: float
    slope_ns_per_m: float

    def __post_init__(self):
        if not OFFSET_MIN_NS <= self.offset_ns <= OFFSET_MAX_NS:
            raise ValueError(
                f"offset_ns {self.offset_ns} outside [{OFFSET_MIN_NS}, {OFFSET_MAX_NS}]"
            )
        if self.slope_ns_per_m < ROUND_TRIP_NS_PER_M - 1e-9:
            raise ValueError(
                f"slope_ns_per_m {self.slope_ns_per_m} below the "
                f"line-of-sight constant {ROUND_TRIP_NS_PER_M}"
            )


LOS_PARAMS_SLOPE = ROUND_TRIP_NS_PER_M


def tof_two_sided(ts: FtmTimestamps) -> float:
    """Two-sided time of flight: (t4 - t1) - (t3 - t2), in ns.

    Subtracting the responder dwell removes the processing delay, which is
    why cooperative ranging needs no offset estimation.
    """
    if ts.t3_ns < ts.t2_ns:
        raise InvalidTimestampsError(
            f"t3 ({ts.t3_ns}) must not precede t2 ({ts.t2_ns})"
        )
    if ts.t4_ns <= ts.t1_ns:
        raise InvalidTimestampsError(
            f"t4 ({ts.t4_ns}) must be after t1 ({ts.t1_ns})"
        )
    return (ts.t4_ns - ts.t1_ns) - (ts.t3_ns - ts.t2_ns)


def tof_one_sided(ts: FtmTimestamps) -> float:
    """One-sided round-trip approximation: t4 - t1, in ns.

    This is all a non-cooperative responder yields; it still contains the
    responder's processing offset.
    """
    if ts.t4_ns <= ts.t1_ns:
        raise InvalidTimestampsError(
            f"t4 ({ts.t4_ns}) must be after t1 ({ts.t1_ns})"
        )
    return ts.t4_ns - ts.t1_ns


def predict_rtt(d_m: float, params: RangingParams) -> float:
    """Modeled RTT at one-way distance d_m, in ns."""
    if d_m < 0:
        raise ValueError(f"distance must be >= 0, got {d_m}")
    return params.slope_ns_per_m * d_m + params.offset_ns


def residual(sample: RangingSample, anchor: Position, params: RangingParams) -> float:
    """Observed minus predicted RTT for one sample against a candidate anchor."""
    d = sample.position.distance_to(anchor)
    return sample.rtt_ns - predict_rtt(d, params)


def canonical_sample_order(samples: Sequence[RangingSample]) -> list[RangingSample]:
    """Samples sorted by (trajectory_id, time_s, bssid, rtt_ns, rssi_dbm).

    Loss evaluation folds squared residuals in this order, which makes
    sum_squared_loss exactly invariant under input permutation.
    """
    return sorted(
        samples,
        key=lambda s: (s.trajectory_id, s.time_s, s.bssid, s.rtt_ns, s.rssi_dbm),
    )


def samples_to_arrays(
    samples: Sequence[RangingSample],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonically ordered (x_m, y_m, rtt_ns) arrays for the kernels."""
    ordered = canonical_sample_order(samples)
    n = len(ordered)
    x = np.empty(n)
    y = np.empty(n)
    t = np.empty(n)
    for i, s in enumerate(ordered):
        x[i] = s.position.x_m
        y[i] = s.position.y_m
        t[i] = s.rtt_ns
    return x, y, t


def sum_squared_loss(
    samples: Sequence[RangingSample], anchor: Position, params: RangingParams
) -> float:
    """Sum of squared residuals over samples, in ns^2.

    Accumulated with a pairwise tree over canonically ordered samples, so the
    value is independent of input order (exactly) and of evaluation schedule.
    """
    if len(samples) == 0:
        raise ValueError("sum_squared_loss requires at least one sample")
    x, y, t = samples_to_arrays(samples)
    return kernels.loss_point(
        x, y, t, anchor.x_m, anchor.y_m, params.offset_ns, params.slope_ns_per_m
    )


def invert_rtt(rtt_ns: float, params: RangingParams) -> float:
    """Distance implied by an observed RTT under params, in meters."""
    return (rtt_ns - params.offset_ns) / params.slope_ns_per_m


def euclidean(a: Position, b: Position) -> float:
    return math.sqrt((a.x_m - b.x_m) ** 2 + (a.y_m - b.y_m) ** 2)
