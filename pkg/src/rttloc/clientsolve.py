"""Client localization from a snapshot of ranging measurements.

Given solved anchor records, the client position minimizes the squared
error between observed RTTs and each anchor's ranging model (its fitted
slope and offset). Repeated measurements to the same BSSID are aggregated
to their mean with weight equal to the measurement count, which leaves the
minimizer identical to summing over the raw measurements.

localize_fixed_slope is the ablation variant: every anchor's slope is
replaced by the line-of-sight constant 2/c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import ROUND_TRIP_NS_PER_M, ApRecord, Bounds, Position
from .errors import UnderdeterminedError
from .optimize import nelder_mead_bounded


@dataclass(frozen=True, slots=True)
class ClientMeasurement:
    rtt_ns: float
    rssi_dbm: float
    bssid: str

    def __post_init__(self):
        if not self.rtt_ns > 0:
            raise ValueError(f"rtt_ns must be positive, got {self.rtt_ns}")
        if not self.bssid:
            raise ValueError("bssid must be non-empty")


@dataclass(frozen=True, slots=True)
class ClientSnapshot:
    """Measurements collected at one (unknown) position.

    ``label`` is the true position when known; it is used only for
    evaluation, never by the solver. RSSI is carried but unused by the
    objective.
    """

    measurements: tuple[ClientMeasurement, ...]
    label: Position | None = None


@dataclass(frozen=True, slots=True)
class ClientSolveConfig:
    min_distinct_aps: int = 3
    coarse_grid_m: float = 1.0
    refine_seeds: int = 5
    refine_max_iters: int = 300
    refine_tol: float = 1e-10

    def __post_init__(self):
        if self.min_distinct_aps < 3:
            raise ValueError("min_distinct_aps must be >= 3")
        for name in ("coarse_grid_m", "refine_seeds", "refine_max_iters", "refine_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, slots=True)
class ApResidual:
    bssid: str
    mean_rtt_ns: float
    weight: int
    distance_m: float
    residual_ns: float


@dataclass(frozen=True, slots=True)
class ClientFix:
    position: Position
    loss_ns2: float
    per_ap: tuple[ApResidual, ...]
    matched_ap_count: int
    unknown_bssids: tuple[str, ...]
    converged: bool


def _aggregate(
    snapshot: ClientSnapshot, db: dict[str, ApRecord]
) -> tuple[list[str], dict[str, tuple[float, int]], tuple[str, ...]]:
    """Per-BSSID mean RTT and count; unknown BSSIDs are skipped but reported.

    RTTs are sorted before averaging, so aggregation is exactly invariant
    under measurement permutation.
    """
    groups: dict[str, list[float]] = {}
    unknown: set[str] = set()
    for meas in snapshot.measurements:
        if meas.bssid in db:
            groups.setdefault(meas.bssid, []).append(meas.rtt_ns)
        else:
            unknown.add(meas.bssid)
    agg: dict[str, tuple[float, int]] = {}
    for bssid in sorted(groups):
        vals = sorted(groups[bssid])
        agg[bssid] = (kernels.pairwise_sum(vals) / len(vals), len(vals))
    return sorted(groups), agg, tuple(sorted(unknown))


def _solve(
    snapshot: ClientSnapshot,
    ap_db: Sequence[ApRecord],
    bounds: Bounds,
    config: ClientSolveConfig,
    fixed_slope: float | None,
) -> ClientFix:
    db = {r.bssid: r for r in ap_db}
    matched, agg, unknown = _aggregate(snapshot, db)
    if len(matched) < config.min_distinct_aps:
        raise UnderdeterminedError(len(matched), config.min_distinct_aps)

    k = len(matched)
    ax = np.empty(k)
    ay = np.empty(k)
    aoff = np.empty(k)
    aslope = np.empty(k)
    art = np.empty(k)
    w = np.empty(k)
    for i, bssid in enumerate(matched):
        rec = db[bssid]
        ax[i] = rec.position.x_m
        ay[i] = rec.position.y_m
        aoff[i] = rec.offset_ns
        aslope[i] = fixed_slope if fixed_slope is not None else rec.slope_ns_per_m
        art[i], w[i] = agg[bssid]

    gx, gy = _client_lattice(bounds, config.coarse_grid_m)
    losses = kernels.client_loss_grid(ax, ay, aoff, aslope, art, w, gx, gy)
    order = np.lexsort((gy, gx, losses))
    n_seeds = min(config.refine_seeds, losses.size)

    def objective(p: np.ndarray) -> float:
        return kernels.client_loss_point(ax, ay, aoff, aslope, art, w, p[0], p[1])

    nm_bounds = [(bounds.x_min, bounds.x_max), (bounds.y_min, bounds.y_max)]
    step = (config.coarse_grid_m / 2.0, config.coarse_grid_m / 2.0)
    best: tuple[float, float, float, bool] | None = None
    for s in range(n_seeds):
        i = order[s]
        res = nelder_mead_bounded(
            objective,
            (gx[i], gy[i]),
            nm_bounds,
            step,
            max_iters=config.refine_max_iters,
            ftol=config.refine_tol,
        )
        cand = (res.loss, float(res.x[0]), float(res.x[1]), res.converged)
        if best is None or cand[:3] < best[:3]:
            best = cand

    assert best is not None
    loss, bx, by, converged = best
    dx = ax - bx
    dy = ay - by
    dist = np.sqrt(dx * dx + dy * dy)
    residuals = art - (aslope * dist + aoff)
    per_ap = tuple(
        ApResidual(
            bssid=matched[i],
            mean_rtt_ns=float(art[i]),
            weight=int(w[i]),
            distance_m=float(dist[i]),
            residual_ns=float(residuals[i]),
        )
        for i in range(k)
    )
    return ClientFix(
        position=Position(bx, by),
        loss_ns2=loss,
        per_ap=per_ap,
        matched_ap_count=k,
        unknown_bssids=unknown,
        converged=converged,
    )


def _client_lattice(bounds: Bounds, step_m: float) -> tuple[np.ndarray, np.ndarray]:
    xs = np.arange(bounds.x_min, bounds.x_max + 1e-9, step_m)
    ys = np.arange(bounds.y_min, bounds.y_max + 1e-9, step_m)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return gx.ravel(), gy.ravel()


def localize(
    snapshot: ClientSnapshot,
    ap_db: Sequence[ApRecord],
    bounds: Bounds,
    config: ClientSolveConfig = ClientSolveConfig(),
) -> ClientFix:
    """Estimate the client position using per-anchor ranging models.

    Raises UnderdeterminedError when fewer than ``min_distinct_aps``
    distinct anchors from the database appear in the snapshot.
    """
    return _solve(snapshot, ap_db, bounds, config, fixed_slope=None)


def localize_fixed_slope(
    snapshot: ClientSnapshot,
    ap_db: Sequence[ApRecord],
    bounds: Bounds,
    config: ClientSolveConfig = ClientSolveConfig(),
) -> ClientFix:
    """Ablation: localize with the line-of-sight slope for every anchor."""
    return _solve(snapshot, ap_db, bounds, config, fixed_slope=ROUND_TRIP_NS_PER_M)
