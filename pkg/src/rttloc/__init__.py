"""Crowdsourced indoor localization from one-way Wi-Fi RTT ranging.

Two-phase pipeline: (1) bootstrap Wi-Fi access points as anchors --
position, processing offset, and NLOS ranging slope -- by multilaterating
crowdsourced ranging samples collected along pedestrian trajectories;
(2) localize clients from sparse ranging snapshots against the solved
anchor database. Includes a desk-scale world simulator and an evaluation
harness producing error statistics and CDFs.
"""

__version__ = "0.1.0"

from .core import (
    DEFAULT_CLOCK_HZ,
    OFFSET_MAX_NS,
    OFFSET_MIN_NS,
    ROUND_TRIP_NS_PER_M,
    SPEED_OF_LIGHT_M_PER_S,
    ApRecord,
    Bounds,
    Position,
    RangingSample,
    tick_distance_equiv_m,
    tick_duration_ns,
)
from .ranging import (
    FtmTimestamps,
    RangingParams,
    predict_rtt,
    residual,
    sum_squared_loss,
    tof_one_sided,
    tof_two_sided,
)

__all__ = [
    "ApRecord",
    "Bounds",
    "DEFAULT_CLOCK_HZ",
    "FtmTimestamps",
    "OFFSET_MAX_NS",
    "OFFSET_MIN_NS",
    "Position",
    "ROUND_TRIP_NS_PER_M",
    "RangingParams",
    "RangingSample",
    "SPEED_OF_LIGHT_M_PER_S",
    "__version__",
    "predict_rtt",
    "residual",
    "sum_squared_loss",
    "tick_distance_equiv_m",
    "tick_duration_ns",
    "tof_one_sided",
    "tof_two_sided",
]
