"""End-to-end experiments: simulate, solve anchors, localize test points, score.

One experiment runs the full pipeline on a world: generate pedestrian
trajectories and their ranging samples (or ingest samples from files),
bootstrap every anchor, fit per-anchor slopes, then localize static test
points laid out on a uniform indoor grid from fresh measurement snapshots.
Test points matching fewer than three solved anchors are discarded (the
multilateration problem is under-determined) and listed in the report.

With ``ablation`` enabled every test point is additionally localized with
the fixed line-of-sight slope, so the effect of per-anchor ranging models
can be compared directly.

All randomness derives from the experiment seed through fixed stream
ordinals, so reports are byte-reproducible and independent of ``jobs``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__ as _pkg_version
from .apsolve import ApSolveConfig, ApSolveFailure, ApSolveReport, solve_all
from .clientsolve import (
    ClientFix,
    ClientMeasurement,
    ClientSnapshot,
    ClientSolveConfig,
    localize,
    localize_fixed_slope,
)
from .core import Bounds, Position, RangingSample
from .errors import UnknownPresetError
from .sim import (
    WorldSpec,
    count_crossings,
    generate_trajectory,
    preset_info,
    split_seed,
    synthesize_samples,
    synthesize_snapshot_measurements,
)
from .stats import ErrorStats, compute_stats, stats_to_dict
from .store import ApDatabase, ProvenanceEntry

# Stream ordinal base for per-test-point snapshot noise (trajectory streams
# use ordinals 2i and 2i+1).
_TEST_POINT_ORDINAL_BASE = 1 << 20


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    trajectories: int | None = None        # default: preset count, else 8
    test_points: int | None = None         # default: preset count, else 12
    snapshot_measurements: int = 200
    trajectory_duration_s: float = 600.0
    ablation: bool = False
    jobs: int = 1
    building_id: str = "sim"
    ap_config: ApSolveConfig = field(default_factory=ApSolveConfig)
    client_config: ClientSolveConfig = field(default_factory=ClientSolveConfig)


@dataclass(frozen=True, slots=True)
class ApEvalRow:
    bssid: str
    est_x_m: float
    est_y_m: float
    true_x_m: float | None
    true_y_m: float | None
    error_m: float | None
    offset_error_ns: float | None
    slope_ns_per_m: float
    sample_count: int
    low_confidence: bool


@dataclass(frozen=True, slots=True)
class ClientEvalRow:
    point_id: str
    true_x_m: float
    true_y_m: float
    est_x_m: float
    est_y_m: float
    error_m: float
    matched_aps: int
    est_fixed_x_m: float | None = None
    est_fixed_y_m: float | None = None
    error_fixed_m: float | None = None


@dataclass(frozen=True, slots=True)
class DiscardedPoint:
    point_id: str
    x_m: float
    y_m: float
    matched_aps: int


@dataclass(frozen=True)
class ExperimentReport:
    world_name: str
    seed: int
    sample_count: int
    ap_reports: tuple[ApSolveReport, ...]
    ap_failures: tuple[ApSolveFailure, ...]
    ap_rows: tuple[ApEvalRow, ...]
    ap_stats: ErrorStats | None
    client_rows: tuple[ClientEvalRow, ...]
    client_stats: ErrorStats | None
    client_stats_fixed_slope: ErrorStats | None
    discarded: tuple[DiscardedPoint, ...]
    nlos_fraction_2plus: float
    config_echo: dict

    def database(self, building_id: str = "sim") -> ApDatabase:
        records = {r.record.bssid: r.record for r in self.ap_reports}
        return ApDatabase(
            building_id=building_id,
            records=records,
            provenance=(
                ProvenanceEntry(
                    batch_id=f"{self.world_name}-seed{self.seed}",
                    sample_count=self.sample_count,
                    timestamp=0.0,
                ),
            ),
        )


def indoor_test_grid(bounds: Bounds, count: int, margin_m: float = 3.0) -> list[Position]:
    """Exactly ``count`` points on a roughly uniform grid inset from bounds."""
    if count < 1:
        raise ValueError("count must be >= 1")
    wx = max(bounds.width_x - 2 * margin_m, 1e-6)
    wy = max(bounds.width_y - 2 * margin_m, 1e-6)
    nx = max(1, round(math.sqrt(count * wx / wy)))
    ny = max(1, math.ceil(count / nx))
    while nx * ny < count:
        nx += 1
    xs = [bounds.x_min + margin_m + (i + 0.5) * wx / nx for i in range(nx)]
    ys = [bounds.y_min + margin_m + (j + 0.5) * wy / ny for j in range(ny)]
    cells = [Position(x, y) for x in xs for y in ys]
    stride_idx = [i * len(cells) // count for i in range(count)]
    return [cells[i] for i in stride_idx]


def simulate_dataset(
    world: WorldSpec,
    seed: int,
    n_trajectories: int,
    duration_s: float = 600.0,
) -> tuple[list, list[RangingSample]]:
    """Trajectories and their samples; streams split per trajectory ordinal."""
    trajectories = []
    samples: list[RangingSample] = []
    for i in range(n_trajectories):
        traj = generate_trajectory(
            world,
            entrance_index=i % len(world.entrances),
            duration_s=duration_s,
            seed=split_seed(seed, 2 * i),
            trajectory_id=f"t{i:03d}",
        )
        trajectories.append(traj)
        samples.extend(synthesize_samples(world, traj, split_seed(seed, 2 * i + 1)))
    return trajectories, samples


def build_snapshots(
    world: WorldSpec, points: Sequence[Position], measurements: int, seed: int
) -> list[tuple[str, ClientSnapshot]]:
    out = []
    for j, p in enumerate(points):
        raw = synthesize_snapshot_measurements(
            world, p, measurements, split_seed(seed, _TEST_POINT_ORDINAL_BASE + j)
        )
        snap = ClientSnapshot(
            measurements=tuple(
                ClientMeasurement(rtt_ns=t, rssi_dbm=r, bssid=b) for t, r, b in raw
            ),
            label=p,
        )
        out.append((f"tp-{j:03d}", snap))
    return out


def run_experiment(
    world: WorldSpec,
    config: ExperimentConfig,
    samples: Sequence[RangingSample] | None = None,
) -> ExperimentReport:
    """Full pipeline on one world; see module docstring."""
    n_traj = config.trajectories
    n_points = config.test_points
    try:
        info = preset_info(world.name)
        n_traj = n_traj if n_traj is not None else info.n_trajectories
        n_points = n_points if n_points is not None else info.n_test_points
    except UnknownPresetError:
        n_traj = n_traj if n_traj is not None else 8
        n_points = n_points if n_points is not None else 12

    if samples is None:
        _, samples = simulate_dataset(
            world, config.seed, n_traj, config.trajectory_duration_s
        )
    samples = list(samples)

    outcome = solve_all(samples, world.bounds, config.ap_config, jobs=config.jobs)
    records = [r.record for r in outcome.reports]

    ap_rows = []
    ap_errors = []
    for rep in outcome.reports:
        rec = rep.record
        try:
            true_ap = world.ap_by_bssid(rec.bssid)
        except KeyError:
            true_ap = None
        if true_ap is not None:
            err = rec.position.distance_to(true_ap.position)
            ap_errors.append(err)
            row = ApEvalRow(
                bssid=rec.bssid,
                est_x_m=rec.position.x_m,
                est_y_m=rec.position.y_m,
                true_x_m=true_ap.position.x_m,
                true_y_m=true_ap.position.y_m,
                error_m=err,
                offset_error_ns=rec.offset_ns - true_ap.offset_ns,
                slope_ns_per_m=rec.slope_ns_per_m,
                sample_count=rec.sample_count,
                low_confidence=rec.low_confidence,
            )
        else:
            row = ApEvalRow(
                bssid=rec.bssid,
                est_x_m=rec.position.x_m,
                est_y_m=rec.position.y_m,
                true_x_m=None,
                true_y_m=None,
                error_m=None,
                offset_error_ns=None,
                slope_ns_per_m=rec.slope_ns_per_m,
                sample_count=rec.sample_count,
                low_confidence=rec.low_confidence,
            )
        ap_rows.append(row)

    points = indoor_test_grid(world.bounds, n_points)
    snapshots = build_snapshots(
        world, points, config.snapshot_measurements, config.seed
    )

    client_rows: list[ClientEvalRow] = []
    discarded: list[DiscardedPoint] = []
    nlos_paths = 0
    total_paths = 0
    record_bssids = {r.bssid for r in records}
    kept: list[tuple[str, ClientSnapshot, list[str]]] = []
    for point_id, snap in snapshots:
        label = snap.label
        assert label is not None
        matched = sorted({m.bssid for m in snap.measurements} & record_bssids)
        if len(matched) < config.client_config.min_distinct_aps:
            discarded.append(
                DiscardedPoint(point_id, label.x_m, label.y_m, len(matched))
            )
            continue
        kept.append((point_id, snap, matched))

    def _solve_point(item) -> tuple[ClientFix, ClientFix | None]:
        _, snap, _ = item
        fix = localize(snap, records, world.bounds, config.client_config)
        fix_f = (
            localize_fixed_slope(snap, records, world.bounds, config.client_config)
            if config.ablation
            else None
        )
        return fix, fix_f

    if config.jobs > 1 and len(kept) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            solved = list(pool.map(_solve_point, kept))
    else:
        solved = [_solve_point(item) for item in kept]

    for (point_id, snap, matched), (fix, fix_f) in zip(kept, solved):
        label = snap.label
        assert label is not None
        client_rows.append(
            ClientEvalRow(
                point_id=point_id,
                true_x_m=label.x_m,
                true_y_m=label.y_m,
                est_x_m=fix.position.x_m,
                est_y_m=fix.position.y_m,
                error_m=fix.position.distance_to(label),
                matched_aps=fix.matched_ap_count,
                est_fixed_x_m=fix_f.position.x_m if fix_f else None,
                est_fixed_y_m=fix_f.position.y_m if fix_f else None,
                error_fixed_m=fix_f.position.distance_to(label) if fix_f else None,
            )
        )
        for bssid in matched:
            total_paths += 1
            try:
                true_ap = world.ap_by_bssid(bssid)
            except KeyError:
                continue
            if count_crossings(world, label, true_ap.position) >= 2:
                nlos_paths += 1

    config_echo = {
        "seed": config.seed,
        "trajectories": n_traj,
        "test_points": n_points,
        "snapshot_measurements": config.snapshot_measurements,
        "ablation": config.ablation,
        "package_version": _pkg_version,
        "std_convention": "population",
    }

    return ExperimentReport(
        world_name=world.name,
        seed=config.seed,
        sample_count=len(samples),
        ap_reports=tuple(outcome.reports),
        ap_failures=tuple(outcome.failures),
        ap_rows=tuple(ap_rows),
        ap_stats=compute_stats(ap_errors) if ap_errors else None,
        client_rows=tuple(client_rows),
        client_stats=(
            compute_stats([r.error_m for r in client_rows]) if client_rows else None
        ),
        client_stats_fixed_slope=(
            compute_stats([r.error_fixed_m for r in client_rows])
            if config.ablation and client_rows
            else None
        ),
        discarded=tuple(discarded),
        nlos_fraction_2plus=(nlos_paths / total_paths) if total_paths else 0.0,
        config_echo=config_echo,
    )


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "world": report.world_name,
        "seed": report.seed,
        "sample_count": report.sample_count,
        "config": report.config_echo,
        "ap_stats": stats_to_dict(report.ap_stats),
        "client_stats": stats_to_dict(report.client_stats),
        "client_stats_fixed_slope": stats_to_dict(report.client_stats_fixed_slope),
        "nlos_fraction_2plus": report.nlos_fraction_2plus,
        "ap_failures": [
            {"bssid": f.bssid, "reason": f.reason, "sample_count": f.sample_count}
            for f in report.ap_failures
        ],
        "aps": [
            {
                "bssid": r.bssid,
                "est_x_m": r.est_x_m,
                "est_y_m": r.est_y_m,
                "true_x_m": r.true_x_m,
                "true_y_m": r.true_y_m,
                "error_m": r.error_m,
                "offset_error_ns": r.offset_error_ns,
                "slope_ns_per_m": r.slope_ns_per_m,
                "sample_count": r.sample_count,
                "low_confidence": r.low_confidence,
            }
            for r in report.ap_rows
        ],
        "test_points": [
            {
                "point_id": r.point_id,
                "true_x_m": r.true_x_m,
                "true_y_m": r.true_y_m,
                "est_x_m": r.est_x_m,
                "est_y_m": r.est_y_m,
                "error_m": r.error_m,
                "matched_aps": r.matched_aps,
                "est_fixed_x_m": r.est_fixed_x_m,
                "est_fixed_y_m": r.est_fixed_y_m,
                "error_fixed_m": r.error_fixed_m,
            }
            for r in report.client_rows
        ],
        "discarded": [
            {
                "point_id": d.point_id,
                "x_m": d.x_m,
                "y_m": d.y_m,
                "matched_aps": d.matched_aps,
            }
            for d in report.discarded
        ],
    }


def write_report_files(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write report.json plus plot-ready CSVs; returns the written paths."""
    import json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out / "report.json"
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report_to_dict(report), fh, indent=2, allow_nan=False)
        fh.write("\n")
    written.append(report_path)

    ap_csv = out / "ap_errors.csv"
    with open(ap_csv, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            [
                "bssid",
                "true_x_m",
                "true_y_m",
                "est_x_m",
                "est_y_m",
                "error_m",
                "offset_error_ns",
                "slope_ns_per_m",
                "sample_count",
                "low_confidence",
            ]
        )
        for r in report.ap_rows:
            w.writerow(
                [
                    r.bssid,
                    _fmt(r.true_x_m),
                    _fmt(r.true_y_m),
                    _fmt(r.est_x_m),
                    _fmt(r.est_y_m),
                    _fmt(r.error_m),
                    _fmt(r.offset_error_ns),
                    _fmt(r.slope_ns_per_m),
                    r.sample_count,
                    int(r.low_confidence),
                ]
            )
    written.append(ap_csv)

    client_csv = out / "client_errors.csv"
    with open(client_csv, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            [
                "point_id",
                "true_x_m",
                "true_y_m",
                "est_x_m",
                "est_y_m",
                "error_m",
                "matched_aps",
                "error_fixed_m",
            ]
        )
        for r in report.client_rows:
            w.writerow(
                [
                    r.point_id,
                    _fmt(r.true_x_m),
                    _fmt(r.true_y_m),
                    _fmt(r.est_x_m),
                    _fmt(r.est_y_m),
                    _fmt(r.error_m),
                    r.matched_aps,
                    _fmt(r.error_fixed_m),
                ]
            )
    written.append(client_csv)

    for name, stats in (
        ("cdf_ap.csv", report.ap_stats),
        ("cdf_client.csv", report.client_stats),
        ("cdf_client_fixed_slope.csv", report.client_stats_fixed_slope),
    ):
        if stats is None:
            continue
        path = out / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["error_m", "fraction"])
            for e, f in stats.cdf:
                w.writerow([_fmt(e), _fmt(f)])
        written.append(path)
    return written


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def run_preset_sweep(
    names: Sequence[str], seed: int, config: ExperimentConfig | None = None
) -> list[dict]:
    """One summary row per floorplan preset (scenario breakdown)."""
    from .sim import preset_world

    rows = []
    for name in names:
        world = preset_world(name, seed)
        cfg = config or ExperimentConfig(seed=seed)
        report = run_experiment(world, cfg)
        info = preset_info(name)
        rows.append(
            {
                "floorplan": name,
                "length_m": info.length_m,
                "width_m": info.width_m,
                "aps": info.n_aps,
                "trajectories": report.config_echo["trajectories"],
                "test_points": report.config_echo["test_points"],
                "ap_median_error_m": (
                    report.ap_stats.median_m if report.ap_stats else None
                ),
                "client_mean_error_m": (
                    report.client_stats.mean_m if report.client_stats else None
                ),
                "client_median_error_m": (
                    report.client_stats.median_m if report.client_stats else None
                ),
            }
        )
    return rows
