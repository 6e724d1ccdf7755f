"""Command-line pipeline: simulate, solve-aps, fit-slopes, localize, evaluate, merge-db.

Every subcommand is deterministic given its flags and seed: running twice
writes byte-identical files, and ``--jobs`` never changes output content.
Config precedence is CLI flag > --config JSON file > preset default.
Errors exit non-zero; with --error-json a machine-readable error object is
printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .apsolve import ApSolveConfig, solve_all
from .clientsolve import ClientSolveConfig, localize
from .errors import RttlocError, UnderdeterminedError
from .harness import (
    ExperimentConfig,
    build_snapshots,
    indoor_test_grid,
    run_experiment,
    simulate_dataset,
    write_report_files,
)
from .sim import PRESET_NAMES, preset_world, with_measurement
from .store import (
    ApDatabase,
    ProvenanceEntry,
    fix_to_dict,
    load_db,
    load_world,
    read_samples,
    read_snapshots,
    save_db,
    save_world,
    write_fixes,
    write_samples,
    write_snapshots,
)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RttlocError as exc:
        _emit_error(args, exc)
        return 2
    except (OSError, ValueError) as exc:
        _emit_error(args, exc)
        return 2


def _emit_error(args, exc: Exception) -> None:
    if getattr(args, "error_json", False):
        doc = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(doc), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rttloc",
        description=(
            "Crowdsourced indoor localization from one-way Wi-Fi RTT ranging: "
            "simulate traces, bootstrap anchors, localize clients, evaluate."
        ),
    )
    parser.add_argument("--version", action="version", version=f"rttloc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--config",
            type=Path,
            default=None,
            help="JSON file of flag defaults (flag names without --); "
            "explicit flags win over the file",
        )
        p.add_argument(
            "--error-json",
            action="store_true",
            help="print errors as a JSON object on stderr",
        )

    def add_world_inputs(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--preset",
            default=None,
            help=f"floorplan preset name, one of: {', '.join(PRESET_NAMES)}",
        )
        p.add_argument("--world", type=Path, default=None, help="world JSON path")
        p.add_argument(
            "--rssi-cutoff-dbm",
            type=float,
            default=None,
            help="drop measurements below this signal strength (dBm)",
        )
        p.add_argument(
            "--noise-sigma-ns",
            type=float,
            default=None,
            help="Gaussian RTT noise standard deviation (ns)",
        )
        p.add_argument(
            "--clock-hz",
            type=float,
            default=None,
            help="sniffer clock frequency used for RTT quantization (Hz)",
        )

    # simulate ---------------------------------------------------------------
    p_sim = sub.add_parser(
        "simulate",
        help="generate world.json, trajectories.jsonl, samples.jsonl",
        description="Simulate pedestrian trajectories and ranging samples "
        "for a preset or explicit world; outputs are deterministic in --seed.",
    )
    add_common(p_sim)
    add_world_inputs(p_sim)
    p_sim.add_argument("--seed", type=int, required=True, help="run seed (integer)")
    p_sim.add_argument(
        "--trajectories",
        type=int,
        default=None,
        help="number of pedestrian traces (default: preset count)",
    )
    p_sim.add_argument(
        "--out", type=Path, required=True, help="output directory for trace files"
    )
    p_sim.set_defaults(func=cmd_simulate)

    # solve-aps ----------------------------------------------------------------
    p_solve = sub.add_parser(
        "solve-aps",
        help="bootstrap anchor positions/offsets from samples",
        description="Multilaterate every BSSID in a samples file into an "
        "anchor database (positions in meters, offsets in ns).",
    )
    add_common(p_solve)
    p_solve.add_argument("--samples", type=Path, required=True, help="samples.jsonl path")
    p_solve.add_argument("--world", type=Path, required=True, help="world JSON (for bounds)")
    p_solve.add_argument("--db", type=Path, required=True, help="output database path")
    p_solve.add_argument("--jobs", type=int, default=1, help="parallel solver width")
    p_solve.add_argument(
        "--min-samples",
        type=int,
        default=None,
        help="minimum samples per BSSID to attempt a solve (default 30)",
    )
    p_solve.add_argument(
        "--building-id", default="sim", help="building identifier stored in the database"
    )
    p_solve.set_defaults(func=cmd_solve_aps)

    # fit-slopes ---------------------------------------------------------------
    p_fit = sub.add_parser(
        "fit-slopes",
        help="fit per-anchor NLOS ranging slopes into a database",
        description="Re-fit the RTT-versus-distance slope (ns/m) of every "
        "database record from a samples file, holding position and offset fixed.",
    )
    add_common(p_fit)
    p_fit.add_argument("--samples", type=Path, required=True, help="samples.jsonl path")
    p_fit.add_argument("--db", type=Path, required=True, help="input database path")
    p_fit.add_argument("--out", type=Path, required=True, help="output database path")
    p_fit.set_defaults(func=cmd_fit_slopes)

    # localize -----------------------------------------------------------------
    p_loc = sub.add_parser(
        "localize",
        help="localize ranging snapshots against a database",
        description="Estimate a position (meters) for each snapshot line "
        "using the per-anchor ranging models in the database.",
    )
    add_common(p_loc)
    p_loc.add_argument(
        "--snapshots", type=Path, required=True, help="snapshots.jsonl path"
    )
    p_loc.add_argument("--db", type=Path, required=True, help="anchor database path")
    p_loc.add_argument("--world", type=Path, required=True, help="world JSON (for bounds)")
    p_loc.add_argument("--out", type=Path, required=True, help="output fixes.jsonl path")
    p_loc.add_argument(
        "--min-aps",
        type=int,
        default=3,
        help="discard snapshots matching fewer than this many anchors",
    )
    p_loc.set_defaults(func=cmd_localize)

    # evaluate -----------------------------------------------------------------
    p_eval = sub.add_parser(
        "evaluate",
        help="run the end-to-end experiment and write report files",
        description="Simulate (or ingest) traces, solve anchors, localize "
        "grid test points, and write report.json plus CSV/CDF artifacts.",
    )
    add_common(p_eval)
    add_world_inputs(p_eval)
    p_eval.add_argument("--seed", type=int, required=True, help="run seed (integer)")
    p_eval.add_argument(
        "--samples",
        type=Path,
        default=None,
        help="ingest ranging samples from this file instead of simulating",
    )
    p_eval.add_argument(
        "--trajectories", type=int, default=None, help="trace count (default: preset)"
    )
    p_eval.add_argument(
        "--test-points", type=int, default=None, help="test point count (default: preset)"
    )
    p_eval.add_argument(
        "--snapshot-measurements",
        type=int,
        default=200,
        help="ranging readings per test point snapshot",
    )
    p_eval.add_argument(
        "--ablation",
        action="store_true",
        help="also localize with the fixed line-of-sight slope and report both",
    )
    p_eval.add_argument("--jobs", type=int, default=1, help="parallel solver width")
    p_eval.add_argument(
        "--min-aps",
        type=int,
        default=3,
        help="discard test points matching fewer than this many anchors",
    )
    p_eval.add_argument("--out", type=Path, required=True, help="output directory")
    p_eval.set_defaults(func=cmd_evaluate)

    # merge-db -------------------------------------------------------------
    p_merge = sub.add_parser(
        "merge-db",
        help="merge two anchor databases by spatial averaging",
        description="Sample-count-weighted merge of two databases for the "
        "same building.",
    )
    add_common(p_merge)
    p_merge.add_argument("db_a", type=Path, help="first database path")
    p_merge.add_argument("db_b", type=Path, help="second database path")
    p_merge.add_argument("--out", type=Path, required=True, help="merged database path")
    p_merge.set_defaults(func=cmd_merge_db)

    return parser


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill unset flags from --config JSON (flag > config file > defaults)."""
    if getattr(args, "config", None) is None:
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for key, value in doc.items():
        attr = key.replace("-", "_")
        if getattr(args, attr, None) is None:
            setattr(args, attr, value)


def _resolve_world(args: argparse.Namespace, seed: int | None = None):
    if args.preset is not None and args.world is not None:
        raise ValueError("give either --preset or --world, not both")
    if args.preset is not None:
        world = preset_world(args.preset, seed if seed is not None else 0)
    elif args.world is not None:
        world = load_world(args.world)
    else:
        raise ValueError("one of --preset or --world is required")
    overrides = {}
    if args.rssi_cutoff_dbm is not None:
        overrides["rssi_cutoff_dbm"] = args.rssi_cutoff_dbm
    if args.noise_sigma_ns is not None:
        overrides["noise_sigma_ns"] = args.noise_sigma_ns
    if args.clock_hz is not None:
        overrides["clock_hz"] = args.clock_hz
    if overrides:
        world = with_measurement(world, **overrides)
    return world


def cmd_simulate(args: argparse.Namespace) -> int:
    _apply_config_file(args)
    world = _resolve_world(args, seed=args.seed)
    n_traj = args.trajectories
    if n_traj is None:
        from .sim import preset_info
        from .errors import UnknownPresetError

        try:
            n_traj = preset_info(world.name).n_trajectories
        except UnknownPresetError:
            n_traj = 8

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trajs, samples = simulate_dataset(world, args.seed, n_traj)

    save_world(out / "world.json", world)
    _write_trajectories(out / "trajectories.jsonl", trajs)
    write_samples(out / "samples.jsonl", samples)
    print(
        f"simulate: {len(trajs)} trajectories, {len(samples)} samples -> {out}",
    )
    return 0


def _write_trajectories(path: Path, trajs) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in trajs:
            doc = {
                "traj_id": t.trajectory_id,
                "time_s": [float(v) for v in t.time_s],
                "true_x_m": [float(v) for v in t.true_xy[:, 0]],
                "true_y_m": [float(v) for v in t.true_xy[:, 1]],
                "est_x_m": [float(v) for v in t.est_xy[:, 0]],
                "est_y_m": [float(v) for v in t.est_xy[:, 1]],
                "indoor": [bool(v) for v in t.indoor],
            }
            fh.write(json.dumps(doc, allow_nan=False, separators=(",", ":")))
            fh.write("\n")


def cmd_solve_aps(args: argparse.Namespace) -> int:
    _apply_config_file(args)
    samples = read_samples(args.samples)
    world = load_world(args.world)
    config = ApSolveConfig()
    if args.min_samples is not None:
        config = replace(config, min_samples=args.min_samples)
    outcome = solve_all(samples, world.bounds, config, jobs=args.jobs)
    for failure in outcome.failures:
        print(f"skipped {failure.bssid}: {failure.reason}", file=sys.stderr)
    if not outcome.reports:
        raise RttlocError(
            "insufficient data: no BSSID reached the minimum sample count "
            f"({config.min_samples}); {len(outcome.failures)} group(s) skipped"
        )
    db = ApDatabase(
        building_id=args.building_id,
        records={r.record.bssid: r.record for r in outcome.reports},
        provenance=(
            ProvenanceEntry(
                batch_id=Path(args.samples).name,
                sample_count=len(samples),
                timestamp=0.0,
            ),
        ),
    )
    save_db(args.db, db)
    print(f"solve-aps: {len(outcome.reports)} anchors -> {args.db}")
    return 0


def cmd_fit_slopes(args: argparse.Namespace) -> int:
    _apply_config_file(args)
    from .apsolve import fit_slope, group_by_bssid
    from .errors import SlopeUnidentifiableError

    samples = read_samples(args.samples)
    db = load_db(args.db)
    groups = group_by_bssid(samples)
    records = {}
    refit = 0
    for bssid in sorted(db.records):
        rec = db.records[bssid]
        group = groups.get(bssid, [])
        if group:
            try:
                rec = fit_slope(group, rec)
                refit += 1
            except SlopeUnidentifiableError:
                rec = replace(rec, low_confidence=True)
        records[bssid] = rec
    save_db(args.out, ApDatabase(db.building_id, records, db.provenance))
    print(f"fit-slopes: refit {refit}/{len(records)} anchors -> {args.out}")
    return 0


def cmd_localize(args: argparse.Namespace) -> int:
    _apply_config_file(args)
    db = load_db(args.db)
    world = load_world(args.world)
    snapshots = read_snapshots(args.snapshots)
    config = ClientSolveConfig(min_distinct_aps=args.min_aps)
    records = db.sorted_records()
    rows = []
    skipped = 0
    for point_id, snap in snapshots:
        try:
            fix = localize(snap, records, world.bounds, config)
        except UnderdeterminedError as exc:
            skipped += 1
            rows.append(
                {"point_id": point_id, "skipped": True, "matched_aps": exc.matched}
            )
            continue
        rows.append(fix_to_dict(point_id, fix, snap.label))
    write_fixes(args.out, rows)
    print(
        f"localize: {len(rows) - skipped} fixes, {skipped} under-determined -> {args.out}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    _apply_config_file(args)
    world = _resolve_world(args, seed=args.seed)
    samples = read_samples(args.samples) if args.samples is not None else None
    config = ExperimentConfig(
        seed=args.seed,
        trajectories=args.trajectories,
        test_points=args.test_points,
        snapshot_measurements=args.snapshot_measurements,
        ablation=args.ablation,
        jobs=args.jobs,
        client_config=ClientSolveConfig(min_distinct_aps=args.min_aps),
    )
    report = run_experiment(world, config, samples=samples)

    out = Path(args.out)
    written = write_report_files(report, out)
    save_db(out / "db.json", report.database())
    points = indoor_test_grid(world.bounds, report.config_echo["test_points"])
    snapshots = build_snapshots(
        world, points, config.snapshot_measurements, config.seed
    )
    write_snapshots(out / "snapshots.jsonl", snapshots)
    written += [out / "db.json", out / "snapshots.jsonl"]

    kept = len(report.client_rows)
    print(
        f"evaluate: {len(report.ap_rows)} anchors, {kept} test points "
        f"({len(report.discarded)} discarded) -> {out}"
    )
    if report.ap_stats:
        print(
            f"  anchor error: median {report.ap_stats.median_m:.2f} m, "
            f"mean {report.ap_stats.mean_m:.2f} m"
        )
    if report.client_stats:
        line = (
            f"  client error: median {report.client_stats.median_m:.2f} m, "
            f"mean {report.client_stats.mean_m:.2f} m"
        )
        if report.client_stats_fixed_slope:
            line += (
                f" (fixed-slope mean {report.client_stats_fixed_slope.mean_m:.2f} m)"
            )
        print(line)
    return 0


def cmd_merge_db(args: argparse.Namespace) -> int:
    _apply_config_file(args)
    from .store import merge_db

    merged = merge_db(load_db(args.db_a), load_db(args.db_b))
    save_db(args.out, merged)
    print(f"merge-db: {len(merged.records)} records -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
