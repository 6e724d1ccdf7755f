"""World simulation: buildings, pedestrian trajectories, ranging measurements."""

from .samples import (
    count_crossings,
    in_range_aps,
    synthesize_samples,
    synthesize_snapshot_measurements,
)
from .trajectory import Trajectory, Waypoint, generate_trajectory
from .world import (
    PRESET_NAMES,
    MeasurementParams,
    PdrParams,
    PresetInfo,
    TrueAp,
    Wall,
    WorldSpec,
    generate_world,
    interior_walls,
    preset_info,
    preset_world,
    split_seed,
    with_measurement,
    with_pdr,
)

__all__ = [
    "PRESET_NAMES",
    "MeasurementParams",
    "PdrParams",
    "PresetInfo",
    "Trajectory",
    "TrueAp",
    "Wall",
    "Waypoint",
    "WorldSpec",
    "count_crossings",
    "generate_trajectory",
    "generate_world",
    "in_range_aps",
    "interior_walls",
    "preset_info",
    "preset_world",
    "split_seed",
    "synthesize_samples",
    "synthesize_snapshot_measurements",
    "with_measurement",
    "with_pdr",
]
