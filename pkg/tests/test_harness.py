from conftest import CONTINUOUS_CLOCK_HZ, exact_recovery_world, sparse_coverage_world, toy_world
from rttloc.core import Bounds
from rttloc.harness import (
    ExperimentConfig,
    indoor_test_grid,
    report_to_dict,
    run_experiment,
    run_preset_sweep,
    simulate_dataset,
    write_report_files,
)
from rttloc.store import read_samples, write_samples


class TestTestGrid:
    def test_exact_count(self):
        b = Bounds(0, 0, 50, 30)
        for count in (1, 5, 11, 12, 40):
            pts = indoor_test_grid(b, count)
            assert len(pts) == count
            for p in pts:
                assert b.contains(p)

    def test_points_distinct(self):
        pts = indoor_test_grid(Bounds(0, 0, 50, 30), 15)
        assert len({(p.x_m, p.y_m) for p in pts}) == 15


class TestRunExperiment:
    def test_noiseless_world_recovers_everything(self):
        w = exact_recovery_world()
        rep = run_experiment(w, ExperimentConfig(seed=11, trajectories=3, test_points=9))
        tick_m = 0.625 * 240e6 / CONTINUOUS_CLOCK_HZ  # scaled tick distance
        assert rep.ap_stats is not None and rep.client_stats is not None
        assert rep.ap_stats.mean_m < max(tick_m, 1e-6)
        assert rep.client_stats.mean_m < max(tick_m, 1e-6)
        assert not rep.discarded

    def test_report_determinism(self):
        w = toy_world(5)
        cfg = ExperimentConfig(seed=5, trajectories=2, test_points=6, ablation=True)
        a = report_to_dict(run_experiment(w, cfg))
        b = report_to_dict(run_experiment(w, cfg))
        assert a == b

    def test_jobs_do_not_change_results(self):
        w = toy_world(5)
        a = report_to_dict(
            run_experiment(w, ExperimentConfig(seed=5, trajectories=2, test_points=6, jobs=1))
        )
        b = report_to_dict(
            run_experiment(w, ExperimentConfig(seed=5, trajectories=2, test_points=6, jobs=8))
        )
        assert a == b

    def test_ingested_samples_match_simulated(self, tmp_path):
        w = toy_world(5)
        _, samples = simulate_dataset(w, 5, 2)
        path = tmp_path / "s.jsonl"
        write_samples(path, samples)
        cfg = ExperimentConfig(seed=5, trajectories=2, test_points=6)
        direct = report_to_dict(run_experiment(w, cfg))
        ingested = report_to_dict(run_experiment(w, cfg, samples=read_samples(path)))
        assert direct == ingested

    def test_discard_rule_and_synthetic_two_ap_point(self):
        w = sparse_coverage_world()
        rep = run_experiment(w, ExperimentConfig(seed=5, trajectories=6, test_points=12))
        assert rep.client_rows, "expected at least one evaluated test point"
        for row in rep.client_rows:
            assert row.matched_aps >= 3
        assert rep.discarded, "expected discarded test points"
        assert any(d.matched_aps == 2 for d in rep.discarded)

    def test_ablation_populates_fixed_slope_fields(self):
        w = toy_world(9)
        rep = run_experiment(
            w, ExperimentConfig(seed=9, trajectories=2, test_points=6, ablation=True)
        )
        assert rep.client_stats_fixed_slope is not None
        for row in rep.client_rows:
            assert row.error_fixed_m is not None

    def test_report_files_written(self, tmp_path):
        w = toy_world(9)
        rep = run_experiment(
            w, ExperimentConfig(seed=9, trajectories=2, test_points=6, ablation=True)
        )
        written = write_report_files(rep, tmp_path)
        names = {p.name for p in written}
        assert {
            "report.json",
            "ap_errors.csv",
            "client_errors.csv",
            "cdf_ap.csv",
            "cdf_client.csv",
            "cdf_client_fixed_slope.csv",
        } <= names
        header = (tmp_path / "cdf_client.csv").read_text().splitlines()[0]
        assert header == "error_m,fraction"

    def test_config_echo_excludes_jobs(self):
        w = toy_world(9)
        rep = run_experiment(w, ExperimentConfig(seed=9, trajectories=2, test_points=6, jobs=4))
        assert "jobs" not in rep.config_echo


class TestPresetSweep:
    def test_five_row_structure(self):
        rows = run_preset_sweep(
            ["A", "B", "C", "D1", "D2"],
            seed=1,
            config=ExperimentConfig(seed=1, trajectories=2, test_points=4),
        )
        assert [r["floorplan"] for r in rows] == ["A", "B", "C", "D1", "D2"]
        assert rows[0]["length_m"] == 94.17 and rows[0]["width_m"] == 37.40
        assert [r["aps"] for r in rows] == [9, 8, 8, 9, 7]
        for r in rows:
            assert r["client_mean_error_m"] is None or r["client_mean_error_m"] >= 0.0
