"""Pedestrian trajectories: outdoor approach, entrance crossing, indoor walk.

The true path starts well outside an entrance, walks in, then follows a
goal-point random walk on a 1 m grid of indoor free space (walls are
impassable; door gaps make the grid connected). The estimated path is GPS
outdoors (white position noise) and dead reckoning indoors: a heading error
random walk (degrees per sqrt-meter) plus per-step length noise, anchored at
the last outdoor fix. The trace ends once the *estimated* indoor travel
distance exceeds the truncation limit, past which drift is deemed unusable.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from ..core import Position
from ..geometry import segments_cross
from .world import WorldSpec, entrance_outward_normal, split_seed


class Waypoint(NamedTuple):
    time_s: float
    true_position: Position
    estimated_position: Position
    indoor: bool


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Timestamped pedestrian path with true and estimated positions."""

    trajectory_id: str
    time_s: np.ndarray        # (n,)
    true_xy: np.ndarray       # (n, 2) meters
    est_xy: np.ndarray        # (n, 2) meters
    indoor: np.ndarray        # (n,) bool

    def __len__(self) -> int:
        return int(self.time_s.shape[0])

    @property
    def waypoints(self) -> Iterator[Waypoint]:
        for k in range(len(self)):
            yield Waypoint(
                float(self.time_s[k]),
                Position(float(self.true_xy[k, 0]), float(self.true_xy[k, 1])),
                Position(float(self.est_xy[k, 0]), float(self.est_xy[k, 1])),
                bool(self.indoor[k]),
            )

    def indoor_travel_m(self) -> float:
        steps = np.diff(self.true_xy, axis=0)
        lens = np.sqrt((steps * steps).sum(axis=1))
        return float(lens[self.indoor[1:]].sum())


@dataclass
class _FreeGrid:
    """1 m grid over the building interior with wall-aware connectivity."""

    origin: tuple[float, float]
    nx: int
    ny: int
    blocked_edges: set[tuple[int, int]] = field(default_factory=set)

    def cell_xy(self, idx: int) -> tuple[float, float]:
        i, j = divmod(idx, self.ny)
        return (self.origin[0] + i, self.origin[1] + j)

    def index(self, i: int, j: int) -> int:
        return i * self.ny + j

    def neighbors(self, idx: int) -> list[int]:
        i, j = divmod(idx, self.ny)
        out = []
        for di, dj in ((0, 1), (1, 0), (0, -1), (-1, 0)):  # fixed order: N E S W
            ni, nj = i + di, j + dj
            if 0 <= ni < self.nx and 0 <= nj < self.ny:
                nidx = self.index(ni, nj)
                key = (idx, nidx) if idx < nidx else (nidx, idx)
                if key not in self.blocked_edges:
                    out.append(nidx)
        return out


def _build_grid(world: WorldSpec) -> _FreeGrid:
    b = world.bounds
    nx = max(1, int(math.floor(b.width_x)))
    ny = max(1, int(math.floor(b.width_y)))
    origin = (b.x_min + 0.5, b.y_min + 0.5)
    grid = _FreeGrid(origin=origin, nx=nx, ny=ny)
    if not world.walls:
        return grid
    for i in range(nx):
        for j in range(ny):
            idx = grid.index(i, j)
            a = (origin[0] + i, origin[1] + j)
            for di, dj in ((0, 1), (1, 0)):
                ni, nj = i + di, j + dj
                if ni < nx and nj < ny:
                    c = (origin[0] + ni, origin[1] + nj)
                    for w in world.walls:
                        if segments_cross(a, c, w.p1, w.p2):
                            grid.blocked_edges.add((idx, grid.index(ni, nj)))
                            break
    return grid


def _bfs_path(grid: _FreeGrid, start: int, goal: int) -> list[int]:
    if start == goal:
        return [start]
    prev = {start: -1}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            break
        for nxt in grid.neighbors(cur):
            if nxt not in prev:
                prev[nxt] = cur
                queue.append(nxt)
    if goal not in prev:
        return []
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _reachable_cells(grid: _FreeGrid, start: int) -> list[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in grid.neighbors(cur):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return sorted(seen)


def generate_trajectory(
    world: WorldSpec,
    entrance_index: int,
    duration_s: float = 600.0,
    seed: int = 0,
    trajectory_id: str | None = None,
) -> Trajectory:
    """One pedestrian trace through the world.

    Waypoints are sampled at the measurement rate so every waypoint is a
    potential ranging tick. The indoor flag flips exactly once, at the
    entrance crossing.
    """
    if not 0 <= entrance_index < len(world.entrances):
        raise IndexError(
            f"entrance_index {entrance_index} out of range "
            f"(world has {len(world.entrances)} entrances)"
        )
    entrance = world.entrances[entrance_index]
    pdr = world.pdr
    rng = np.random.default_rng(split_seed(seed, 0x7E))

    nxv, nyv = entrance_outward_normal(world, entrance)
    lateral = (-nyv, nxv)
    away = 10.0 + float(rng.uniform(0.0, 5.0))
    side = float(rng.uniform(-4.0, 4.0))
    start = (
        entrance.x_m + nxv * away + lateral[0] * side,
        entrance.y_m + nyv * away + lateral[1] * side,
    )

    grid = _build_grid(world)
    entry_cell = _nearest_cell(grid, entrance)
    cells = _reachable_cells(grid, entry_cell)

    # Indoor polyline: random goals joined by shortest grid paths, generated
    # until the true length comfortably exceeds the truncation limit.
    target_len = pdr.indoor_truncation_m * 1.25 + 10.0
    verts: list[tuple[float, float]] = [start, (entrance.x_m, entrance.y_m)]
    verts.append(grid.cell_xy(entry_cell))
    cur = entry_cell
    indoor_len = _polyline_len(verts[1:])
    guard = 0
    while indoor_len < target_len and guard < 1000:
        guard += 1
        goal = int(cells[rng.integers(0, len(cells))])
        path = _bfs_path(grid, cur, goal)
        if len(path) < 2:
            continue
        for idx in path[1:]:
            verts.append(grid.cell_xy(idx))
        indoor_len = _polyline_len(verts[1:])
        cur = goal

    verts_arr = np.asarray(verts, dtype=np.float64)
    seg = np.diff(verts_arr, axis=0)
    seg_len = np.sqrt((seg * seg).sum(axis=1))
    cum = np.concatenate(([0.0], np.cumsum(seg_len)))
    total_len = float(cum[-1])
    outdoor_len = float(np.linalg.norm(verts_arr[1] - verts_arr[0]))

    dt = 1.0 / world.measurement.rate_hz
    v = pdr.speed_m_s
    if v <= 0:
        raise ValueError("walking speed must be positive")
    n_max = min(int(duration_s / dt), int(total_len / (v * dt)))
    t = np.arange(n_max + 1) * dt
    s = np.minimum(v * t, total_len)
    true_x = np.interp(s, cum, verts_arr[:, 0])
    true_y = np.interp(s, cum, verts_arr[:, 1])
    indoor = s > outdoor_len

    n = t.shape[0]
    est_x = true_x.copy()
    est_y = true_y.copy()

    out_idx = np.flatnonzero(~indoor)
    gps = rng.normal(0.0, pdr.gps_sigma_m, size=(out_idx.size, 2))
    est_x[out_idx] += gps[:, 0]
    est_y[out_idx] += gps[:, 1]

    in_idx = np.flatnonzero(indoor)
    if in_idx.size:
        k0 = int(in_idx[0])
        step_x = np.diff(true_x[k0 - 1 :])
        step_y = np.diff(true_y[k0 - 1 :])
        step_len = np.sqrt(step_x * step_x + step_y * step_y)
        sigma_h = math.radians(pdr.heading_drift_deg_per_sqrt_m)
        if sigma_h == 0.0 and pdr.step_scale_sigma == 0.0:
            # Drift-free dead reckoning tracks motion exactly relative to
            # its anchor fix.
            est_len = step_len
            est_x[k0:] = true_x[k0:] + (est_x[k0 - 1] - true_x[k0 - 1])
            est_y[k0:] = true_y[k0:] + (est_y[k0 - 1] - true_y[k0 - 1])
        else:
            herr = np.cumsum(
                rng.normal(0.0, 1.0, size=step_len.size) * sigma_h * np.sqrt(step_len)
            )
            scale = 1.0 + rng.normal(0.0, pdr.step_scale_sigma, size=step_len.size)
            # Estimated step = true step scaled and rotated by the
            # accumulated heading error.
            ce = np.cos(herr)
            se = np.sin(herr)
            est_len = step_len * scale
            est_x[k0:] = est_x[k0 - 1] + np.cumsum(scale * (ce * step_x - se * step_y))
            est_y[k0:] = est_y[k0 - 1] + np.cumsum(scale * (se * step_x + ce * step_y))

        est_travel = np.cumsum(est_len)
        over = np.flatnonzero(est_travel > pdr.indoor_truncation_m)
        if over.size:
            cut = k0 + int(over[0]) + 1
            t, true_x, true_y = t[:cut], true_x[:cut], true_y[:cut]
            est_x, est_y, indoor = est_x[:cut], est_y[:cut], indoor[:cut]

    tid = trajectory_id if trajectory_id is not None else f"traj-{seed:016x}"
    return Trajectory(
        trajectory_id=tid,
        time_s=t,
        true_xy=np.stack([true_x, true_y], axis=1),
        est_xy=np.stack([est_x, est_y], axis=1),
        indoor=indoor,
    )


def _polyline_len(verts) -> float:
    arr = np.asarray(verts, dtype=np.float64)
    if arr.shape[0] < 2:
        return 0.0
    seg = np.diff(arr, axis=0)
    return float(np.sqrt((seg * seg).sum(axis=1)).sum())


def _nearest_cell(grid: _FreeGrid, p: Position) -> int:
    best = None
    best_d = math.inf
    for i in range(grid.nx):
        for j in range(grid.ny):
            cx, cy = grid.origin[0] + i, grid.origin[1] + j
            d = (cx - p.x_m) ** 2 + (cy - p.y_m) ** 2
            if d < best_d:
                best_d = d
                best = grid.index(i, j)
    assert best is not None
    return best
