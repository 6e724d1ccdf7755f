"""Acceptance suite: one test per numbered criterion, stated tolerances only.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion. Expected values marked by hand arithmetic or Monte-Carlo
calibration are frozen here; lattice oracles are independent numpy
implementations, deliberately not sharing code with the solvers.
"""

import json
import time

import numpy as np
import pytest

from conftest import (
    CONTINUOUS_CLOCK_HZ,
    exact_recovery_world,
    nlos_ablation_world,
    sparse_coverage_world,
    toy_world,
)
from rttloc.apsolve import group_by_bssid, solve_ap
from rttloc.cli import main as cli_main
from rttloc.clientsolve import localize
from rttloc.core import (
    ROUND_TRIP_NS_PER_M,
    Position,
    tick_distance_equiv_m,
    tick_duration_ns,
)
from rttloc.harness import (
    ExperimentConfig,
    build_snapshots,
    indoor_test_grid,
    run_experiment,
    simulate_dataset,
    write_report_files,
)
from rttloc.ranging import samples_to_arrays
from rttloc.sim import MeasurementParams, generate_world
from rttloc.sim.world import TrueAp, Wall
from rttloc.sim.samples import synthesize_snapshot_measurements
from rttloc.stats import compute_stats, mean_from_cdf, median_from_cdf
from rttloc.store import save_world

LOS = ROUND_TRIP_NS_PER_M


def _passed(n: int, detail: str) -> None:
    print(f"\n[acceptance] criterion {n}: PASS ({detail})")


# -- independent lattice oracles (brute force, numpy only) --------------------


def anchor_lattice_oracle(samples, bounds, step_m=0.25, step_ns=50.0) -> float:
    """Exhaustive minimum of the anchor loss over an (x, y, offset) lattice."""
    x, y, t = samples_to_arrays(samples)
    gx = np.arange(bounds.x_min, bounds.x_max + 1e-9, step_m)
    gy = np.arange(bounds.y_min, bounds.y_max + 1e-9, step_m)
    offs = np.arange(8000.0, 12000.0 + 1e-9, step_ns)
    best = np.inf
    for xx in gx:
        dy = y[None, :] - gy[:, None]
        dx = x - xx
        d = np.sqrt(dx[None, :] ** 2 + dy * dy)                    # (ny, n)
        r = t[None, None, :] - (LOS * d[None, :, :] + offs[:, None, None])
        best = min(best, float((r * r).sum(axis=2).min()))
    return best


def client_lattice_oracle(snapshot, records, bounds, step_m=0.25) -> float:
    """Exhaustive minimum of the weighted client loss over an (x, y) lattice."""
    groups = {}
    by_bssid = {r.bssid: r for r in records}
    for m in snapshot.measurements:
        if m.bssid in by_bssid:
            groups.setdefault(m.bssid, []).append(m.rtt_ns)
    best = np.inf
    for gx in np.arange(bounds.x_min, bounds.x_max + 1e-9, step_m):
        for gy in np.arange(bounds.y_min, bounds.y_max + 1e-9, step_m):
            loss = 0.0
            for bssid, vals in groups.items():
                rec = by_bssid[bssid]
                mean = sum(vals) / len(vals)
                d = np.hypot(gx - rec.position.x_m, gy - rec.position.y_m)
                r = mean - (rec.slope_ns_per_m * d + rec.offset_ns)
                loss += len(vals) * r * r
            best = min(best, loss)
    return float(best)


# -- criteria ------------------------------------------------------------------


def test_criterion_1_exact_recovery():
    start = time.monotonic()
    w = exact_recovery_world(CONTINUOUS_CLOCK_HZ)
    _, samples = simulate_dataset(w, 11, 3)
    groups = group_by_bssid(samples)
    assert len(groups) == 3
    worst_pos = worst_off = 0.0
    for bssid, group in groups.items():
        rep = solve_ap(group, w.bounds)
        true = w.ap_by_bssid(bssid)
        pos_err = rep.record.position.distance_to(true.position)
        off_err = abs(rep.record.offset_ns - true.offset_ns)
        assert pos_err < 0.05, f"{bssid}: position error {pos_err:.4f} m"
        assert off_err < 1.0, f"{bssid}: offset error {off_err:.3f} ns"
        worst_pos = max(worst_pos, pos_err)
        worst_off = max(worst_off, off_err)

    records = [solve_ap(groups[b], w.bounds).record for b in groups]
    worst_client = 0.0
    for point_id, snap in build_snapshots(w, indoor_test_grid(w.bounds, 9), 60, 123):
        fix = localize(snap, records, w.bounds)
        err = fix.position.distance_to(snap.label)
        assert err < 0.05, f"{point_id}: client error {err:.4f} m"
        worst_client = max(worst_client, err)

    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"runtime {elapsed:.1f} s exceeds 30 s"
    _passed(
        1,
        f"worst anchor {worst_pos:.4f} m / {worst_off:.4f} ns, "
        f"worst client {worst_client:.4f} m, {elapsed:.1f} s",
    )


def test_criterion_2_oracle_equivalence():
    start = time.monotonic()
    checked_ap = checked_client = 0
    for seed in range(1, 11):
        w = toy_world(seed)
        _, samples = simulate_dataset(w, seed, 2)
        groups = group_by_bssid(samples)
        records = []
        for bssid, group in groups.items():
            if len(group) < 30:
                continue
            rep = solve_ap(group, w.bounds)
            oracle = anchor_lattice_oracle(group, w.bounds)
            assert rep.loss_ns2 <= oracle * (1 + 1e-9), (
                f"seed {seed} {bssid}: solver {rep.loss_ns2} > oracle {oracle}"
            )
            records.append(rep.record)
            checked_ap += 1

        for point_id, snap in build_snapshots(
            w, indoor_test_grid(w.bounds, 4), 40, seed
        ):
            matched = {m.bssid for m in snap.measurements} & {r.bssid for r in records}
            if len(matched) < 3:
                continue
            fix = localize(snap, records, w.bounds)
            oracle = client_lattice_oracle(snap, records, w.bounds)
            assert fix.loss_ns2 <= oracle * (1 + 1e-9), (
                f"seed {seed} {point_id}: solver {fix.loss_ns2} > oracle {oracle}"
            )
            checked_client += 1

    elapsed = time.monotonic() - start
    assert checked_ap >= 20 and checked_client >= 20
    assert elapsed < 120.0, f"runtime {elapsed:.1f} s exceeds 2 min"
    _passed(2, f"{checked_ap} anchor and {checked_client} client solves, {elapsed:.1f} s")


def test_criterion_3_quantization_constants():
    tick = tick_duration_ns(240e6)
    dist = tick_distance_equiv_m(240e6)
    assert tick == pytest.approx(4.1667, abs=1e-3)
    assert dist == pytest.approx(0.625, abs=1e-3)
    _passed(3, f"tick {tick:.4f} ns, tick distance {dist:.4f} m")


def test_criterion_4_paper_scale_simulation():
    from rttloc.sim import preset_world

    start = time.monotonic()
    ap_errors: list[float] = []
    client_errors: list[float] = []
    for seed in (1, 2, 3, 4, 5):
        w = preset_world("A", seed=seed)
        rep = run_experiment(w, ExperimentConfig(seed=seed, jobs=4))
        ap_errors += [r.error_m for r in rep.ap_rows if r.error_m is not None]
        client_errors += [r.error_m for r in rep.client_rows]
    ap_median = float(np.median(ap_errors))
    client_median = float(np.median(client_errors))
    elapsed = time.monotonic() - start
    assert ap_median <= 2.0, f"anchor median {ap_median:.2f} m exceeds 2.0 m"
    assert client_median <= 4.0, f"client median {client_median:.2f} m exceeds 4.0 m"
    assert elapsed < 300.0, f"runtime {elapsed:.1f} s exceeds 5 min"
    _passed(
        4,
        f"anchor median {ap_median:.2f} m (n={len(ap_errors)}), "
        f"client median {client_median:.2f} m (n={len(client_errors)}), {elapsed:.0f} s",
    )


def test_criterion_5_ablation_ordering():
    details = []
    for seed in (1, 2, 3, 4, 5):
        w = nlos_ablation_world(seed)
        rep = run_experiment(
            w,
            ExperimentConfig(
                seed=seed, ablation=True, jobs=4, trajectories=8, test_points=12
            ),
        )
        assert rep.nlos_fraction_2plus >= 0.30, (
            f"seed {seed}: only {rep.nlos_fraction_2plus:.2f} of paths cross >= 2 walls"
        )
        mean_on = rep.client_stats.mean_m
        mean_off = rep.client_stats_fixed_slope.mean_m
        assert mean_on < mean_off, (
            f"seed {seed}: per-anchor slope mean {mean_on:.2f} m not below "
            f"fixed-slope mean {mean_off:.2f} m"
        )
        details.append(f"s{seed} {mean_on:.2f}<{mean_off:.2f}")
    _passed(5, ", ".join(details))


def test_criterion_6_nlos_monotonicity():
    rng = np.random.default_rng(606)
    cases = 0
    while cases < 1000:
        ap_x = float(rng.uniform(25.0, 38.0))
        ap_y = float(rng.uniform(2.0, 18.0))
        cl_x = float(rng.uniform(2.0, 15.0))
        cl_y = float(rng.uniform(2.0, 18.0))
        nlos_slope = float(rng.uniform(1.0, 2.5)) * LOS
        offset = float(rng.uniform(8000.0, 12000.0))
        n_walls = int(rng.integers(1, 4))
        xs = np.sort(rng.uniform(cl_x + 0.5, ap_x - 0.5, size=n_walls))
        walls = tuple(
            Wall(float(wx), 0.0, float(wx), 20.0,
                 float(rng.uniform(1.0, 8.0)), float(rng.uniform(2.0, 15.0)))
            for wx in xs
        )
        ap = (TrueAp("02:aa", Position(ap_x, ap_y), offset, nlos_slope),)
        meas = MeasurementParams(noise_sigma_ns=0.0, rssi_cutoff_dbm=-500.0)
        base = generate_world(40.0, 20.0, 1, seed=1, aps=ap, measurement=meas)
        walled = generate_world(
            40.0, 20.0, 1, seed=1, aps=ap, walls=walls, measurement=meas
        )
        client = Position(cl_x, cl_y)
        rtt0, rssi0, _ = synthesize_snapshot_measurements(base, client, 1, seed=7)[0]
        rtt1, rssi1, _ = synthesize_snapshot_measurements(walled, client, 1, seed=7)[0]
        assert rtt1 >= rtt0, f"case {cases}: rtt decreased {rtt0} -> {rtt1}"
        assert rssi1 <= rssi0, f"case {cases}: rssi increased {rssi0} -> {rssi1}"
        cases += 1
    _passed(6, "1000 randomized wall insertions monotone in RTT and RSSI")


def test_criterion_7_statistics():
    s = compute_stats([1.0, 2.0, 3.0])
    assert s.mean_m == pytest.approx(2.0, abs=1e-12)
    assert s.median_m == pytest.approx(2.0, abs=1e-12)
    assert s.std_m == pytest.approx(0.8165, abs=1e-4)
    rng = np.random.default_rng(77)
    for _ in range(25):
        data = np.round(rng.exponential(3.0, size=int(rng.integers(1, 80))), 2)
        st = compute_stats(data)
        assert mean_from_cdf(st.cdf) == pytest.approx(st.mean_m, abs=1e-9)
        assert median_from_cdf(st.cdf) == pytest.approx(st.median_m, abs=1e-9)
    _passed(7, "stats unit values and CDF self-consistency at 1e-9")


def test_criterion_8_cli_determinism(tmp_path):
    world_file = tmp_path / "world.json"
    save_world(world_file, toy_world(3))

    def pipeline(tag: str, jobs: int) -> dict:
        root = tmp_path / tag
        sim = root / "sim"
        assert cli_main(["simulate", "--world", str(world_file), "--seed", "3",
                         "--trajectories", "2", "--out", str(sim)]) == 0
        db1 = root / "db.json"
        assert cli_main(["solve-aps", "--samples", str(sim / "samples.jsonl"),
                         "--world", str(world_file), "--db", str(db1),
                         "--jobs", str(jobs)]) == 0
        db2 = root / "db-slopes.json"
        assert cli_main(["fit-slopes", "--samples", str(sim / "samples.jsonl"),
                         "--db", str(db1), "--out", str(db2)]) == 0
        ev = root / "eval"
        assert cli_main(["evaluate", "--world", str(world_file), "--seed", "3",
                         "--trajectories", "2", "--test-points", "6",
                         "--ablation", "--jobs", str(jobs), "--out", str(ev)]) == 0
        fixes = root / "fixes.jsonl"
        assert cli_main(["localize", "--snapshots", str(ev / "snapshots.jsonl"),
                         "--db", str(db2), "--world", str(world_file),
                         "--out", str(fixes)]) == 0
        merged = root / "merged.json"
        assert cli_main(["merge-db", str(db1), str(db2), "--out", str(merged)]) == 0
        out = {}
        for p in sorted(root.rglob("*")):
            if p.is_file():
                out[str(p.relative_to(root))] = p.read_bytes()
        return out

    first = pipeline("run1", jobs=1)
    second = pipeline("run2", jobs=1)
    wide = pipeline("run3", jobs=8)
    assert first.keys() == second.keys() == wide.keys()
    for name in first:
        assert first[name] == second[name], f"rerun changed bytes of {name}"
        assert first[name] == wide[name], f"--jobs 8 changed bytes of {name}"
    _passed(8, f"{len(first)} files byte-identical across reruns and --jobs 1 vs 8")


def test_criterion_9_discard_rule(tmp_path):
    w = sparse_coverage_world()
    rep = run_experiment(w, ExperimentConfig(seed=5, trajectories=6, test_points=12))
    write_report_files(rep, tmp_path)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["test_points"], "no evaluated test points"
    for row in report["test_points"]:
        assert row["matched_aps"] >= 3
    discarded = report["discarded"]
    assert any(d["matched_aps"] == 2 for d in discarded), (
        "expected a discarded test point hearing exactly 2 anchors"
    )
    _passed(
        9,
        f"{len(report['test_points'])} kept (all >= 3 anchors), "
        f"{len(discarded)} discarded incl. a 2-anchor point",
    )
