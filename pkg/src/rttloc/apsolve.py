"""Anchor bootstrapping: solve (x, y, offset) per BSSID, then fit the slope.

The position/offset solve minimizes the sum of squared RTT residuals under
the line-of-sight slope, with the position constrained to the building
bounds and the offset to the standard [8, 12] us turnaround range. The
objective is nonconvex in position, so the solver grades a coarse position
lattice (profiling the offset out analytically at each cell -- for fixed
(x, y) the loss is an exact quadratic in the offset) and refines the best
spatially-distinct cells with a bounded simplex descent over all three
parameters; ties break lexicographically so results are reproducible
bit-for-bit.

Slope fitting runs afterwards with position and offset frozen: a one-
parameter least squares through the fixed intercept,

    alpha = sum(d_i * (t_i - offset)) / sum(d_i^2)

clamped to [1, 4] times the line-of-sight constant.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .core import (
    OFFSET_MAX_NS,
    OFFSET_MIN_NS,
    ROUND_TRIP_NS_PER_M,
    ApRecord,
    Bounds,
    Position,
    RangingSample,
)
from .errors import InsufficientDataError, SlopeUnidentifiableError
from .geometry import diameter
from .optimize import nelder_mead_bounded
from .ranging import samples_to_arrays

SLOPE_CLAMP_MAX = 4.0 * ROUND_TRIP_NS_PER_M


@dataclass(frozen=True, slots=True)
class ApSolveConfig:
    coarse_grid_m: float = 2.0
    offset_grid_ns: float = 250.0
    refine_seeds: int = 5
    refine_max_iters: int = 500
    refine_tol: float = 1e-10
    min_samples: int = 30
    min_spread_m: float = 5.0

    def __post_init__(self):
        for name in (
            "coarse_grid_m",
            "offset_grid_ns",
            "refine_seeds",
            "refine_max_iters",
            "refine_tol",
            "min_samples",
            "min_spread_m",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.offset_grid_ns > OFFSET_MAX_NS - OFFSET_MIN_NS:
            raise ValueError("offset_grid_ns exceeds the offset search range")


@dataclass(frozen=True, slots=True)
class ApSolveReport:
    record: ApRecord
    loss_ns2: float
    seeds_evaluated: int
    converged: bool


@dataclass(frozen=True, slots=True)
class ApSolveFailure:
    bssid: str
    reason: str
    sample_count: int


@dataclass(frozen=True, slots=True)
class SolveAllResult:
    reports: tuple[ApSolveReport, ...]
    failures: tuple[ApSolveFailure, ...]


def group_by_bssid(
    samples: Sequence[RangingSample],
) -> dict[str, list[RangingSample]]:
    """Partition samples by BSSID; keys sorted, input order kept per group."""
    groups: dict[str, list[RangingSample]] = {}
    for s in samples:
        groups.setdefault(s.bssid, []).append(s)
    return {k: groups[k] for k in sorted(groups)}


def _lattice(bounds: Bounds, step_m: float) -> tuple[np.ndarray, np.ndarray]:
    xs = np.arange(bounds.x_min, bounds.x_max + 1e-9, step_m)
    ys = np.arange(bounds.y_min, bounds.y_max + 1e-9, step_m)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return gx.ravel(), gy.ravel()


def offset_lattice(step_ns: float) -> np.ndarray:
    return np.arange(OFFSET_MIN_NS, OFFSET_MAX_NS + 1e-9, step_ns)


def _spread_seeds(order: np.ndarray, gx: np.ndarray, gy: np.ndarray,
                  config: ApSolveConfig) -> list[int]:
    """Top-ranked grid positions, kept at least two cells apart.

    Greedy selection in rank order so refinement starts cover distinct
    basins; falls back to plain rank order if spacing leaves slots unfilled.
    """
    min_gap = 2.0 * config.coarse_grid_m
    chosen: list[int] = []
    for i in order:
        if len(chosen) >= config.refine_seeds:
            break
        if all(
            (gx[i] - gx[j]) ** 2 + (gy[i] - gy[j]) ** 2 >= min_gap * min_gap
            for j in chosen
        ):
            chosen.append(int(i))
    if len(chosen) < config.refine_seeds:
        for i in order:
            if len(chosen) >= config.refine_seeds:
                break
            if int(i) not in chosen:
                chosen.append(int(i))
    return chosen


def solve_ap(
    samples: Sequence[RangingSample],
    bounds: Bounds,
    config: ApSolveConfig = ApSolveConfig(),
) -> ApSolveReport:
    """Estimate one anchor's position and offset from its sample group.

    Requires at least ``config.min_samples`` samples. Degenerate geometry
    (sample spread below ``min_spread_m``) still returns a best-effort
    solve, flagged ``low_confidence``. The slope is left at the
    line-of-sight constant; see fit_slope.
    """
    if not samples:
        raise InsufficientDataError("", 0, config.min_samples)
    bssid = samples[0].bssid
    for s in samples:
        if s.bssid != bssid:
            raise ValueError(f"mixed bssids in solve_ap: {bssid!r} vs {s.bssid!r}")
    if len(samples) < config.min_samples:
        raise InsufficientDataError(bssid, len(samples), config.min_samples)

    x, y, t = samples_to_arrays(samples)
    gx, gy = _lattice(bounds, config.coarse_grid_m)
    # Rank grid positions with the offset profiled out exactly (for fixed
    # (x, y) the loss is quadratic in the offset). Ranking raw
    # position-by-offset cells instead penalizes positions whose optimal
    # offset falls between grid lines by up to (step/2)^2 * n, which
    # systematically favors basins pinned at the offset clamps.
    per_pos, per_pos_off = kernels.profile_loss_grid(
        x, y, t, gx, gy, ROUND_TRIP_NS_PER_M, OFFSET_MIN_NS, OFFSET_MAX_NS
    )
    order = np.lexsort((gy, gx, per_pos))
    seeds = _spread_seeds(order, gx, gy, config)

    nm_bounds = [
        (bounds.x_min, bounds.x_max),
        (bounds.y_min, bounds.y_max),
        (OFFSET_MIN_NS, OFFSET_MAX_NS),
    ]
    step = (config.coarse_grid_m / 2.0, config.coarse_grid_m / 2.0, config.offset_grid_ns / 2.0)

    def objective(p: np.ndarray) -> float:
        return kernels.loss_point(x, y, t, p[0], p[1], p[2], ROUND_TRIP_NS_PER_M)

    best: tuple[float, float, float, float, bool] | None = None
    for i in seeds:
        x0 = (gx[i], gy[i], per_pos_off[i])
        res = nelder_mead_bounded(
            objective,
            x0,
            nm_bounds,
            step,
            max_iters=config.refine_max_iters,
            ftol=config.refine_tol,
        )
        cand = (res.loss, float(res.x[0]), float(res.x[1]), float(res.x[2]), res.converged)
        if best is None or cand[:4] < best[:4]:
            best = cand
    n_seeds = len(seeds)

    assert best is not None
    loss, bx, by, boff, converged = best
    n = len(samples)
    spread = diameter(np.stack([x, y], axis=1))
    record = ApRecord(
        bssid=bssid,
        position=Position(bx, by),
        offset_ns=boff,
        slope_ns_per_m=ROUND_TRIP_NS_PER_M,
        sample_count=n,
        residual_rms_ns=float(np.sqrt(loss / n)),
        spread_m=spread,
        low_confidence=spread < config.min_spread_m,
    )
    return ApSolveReport(
        record=record, loss_ns2=loss, seeds_evaluated=n_seeds, converged=converged
    )


def fit_slope(samples: Sequence[RangingSample], record: ApRecord) -> ApRecord:
    """Fit the RTT-versus-distance gradient with position and offset frozen.

    Closed-form least squares through the fixed intercept, clamped to
    [1, 4] times the line-of-sight slope. Raises SlopeUnidentifiableError
    when all sample distances coincide (the gradient is unobservable).
    """
    x, y, t = samples_to_arrays(samples)
    dx = x - record.position.x_m
    dy = y - record.position.y_m
    d = np.sqrt(dx * dx + dy * dy)
    # Distances must differ by more than float noise at the working scale,
    # or the gradient is unobservable.
    if d.size < 2 or float(d.max() - d.min()) < 1e-6 * max(1.0, float(d.max())):
        raise SlopeUnidentifiableError(record.bssid)
    denom = float((d * d).sum())
    if denom <= 0.0:
        raise SlopeUnidentifiableError(record.bssid, "all samples at the anchor")
    alpha = float((d * (t - record.offset_ns)).sum() / denom)
    alpha = min(max(alpha, ROUND_TRIP_NS_PER_M), SLOPE_CLAMP_MAX)
    loss = kernels.loss_point(
        x, y, t, record.position.x_m, record.position.y_m, record.offset_ns, alpha
    )
    return replace(
        record,
        slope_ns_per_m=alpha,
        residual_rms_ns=float(np.sqrt(loss / d.size)),
    )


def _solve_one(
    bssid: str,
    group: list[RangingSample],
    bounds: Bounds,
    config: ApSolveConfig,
) -> tuple[ApSolveReport | None, ApSolveFailure | None]:
    try:
        report = solve_ap(group, bounds, config)
    except InsufficientDataError as exc:
        return None, ApSolveFailure(bssid, str(exc), len(group))
    try:
        record = fit_slope(group, report.record)
        report = replace(report, record=record)
    except SlopeUnidentifiableError:
        report = replace(report, record=replace(report.record, low_confidence=True))
    return report, None


def solve_all(
    samples: Sequence[RangingSample],
    bounds: Bounds,
    config: ApSolveConfig = ApSolveConfig(),
    jobs: int = 1,
) -> SolveAllResult:
    """Group, solve, and slope-fit every observed BSSID.

    Per-anchor failures (too few samples) are reported, not fatal. Output
    is ordered by BSSID and independent of ``jobs``; per-anchor solves are
    pure and run in parallel when jobs > 1.
    """
    groups = group_by_bssid(samples)
    bssids = list(groups)
    if jobs > 1 and len(bssids) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(lambda b: _solve_one(b, groups[b], bounds, config), bssids)
            )
    else:
        results = [_solve_one(b, groups[b], bounds, config) for b in bssids]

    reports = tuple(r for r, _ in results if r is not None)
    failures = tuple(f for _, f in results if f is not None)
    return SolveAllResult(reports=reports, failures=failures)
