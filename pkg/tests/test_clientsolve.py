import random

import numpy as np
import pytest

from rttloc.clientsolve import (
    ClientMeasurement,
    ClientSnapshot,
    ClientSolveConfig,
    localize,
    localize_fixed_slope,
)
from rttloc.core import ROUND_TRIP_NS_PER_M, ApRecord, Bounds, Position
from rttloc.errors import UnderdeterminedError
from rttloc.ranging import RangingParams, predict_rtt

LOS = ROUND_TRIP_NS_PER_M


def _record(bssid, x, y, offset, slope=LOS):
    return ApRecord(
        bssid=bssid,
        position=Position(x, y),
        offset_ns=offset,
        slope_ns_per_m=slope,
        sample_count=100,
        residual_rms_ns=1.0,
        spread_m=20.0,
    )


def _snapshot_at(client: Position, records, n_per_ap=1, label=True):
    meas = []
    for rec in records:
        params = RangingParams(offset_ns=rec.offset_ns, slope_ns_per_m=rec.slope_ns_per_m)
        rtt = predict_rtt(client.distance_to(rec.position), params)
        meas += [ClientMeasurement(rtt, -45.0, rec.bssid)] * n_per_ap
    return ClientSnapshot(tuple(meas), label=client if label else None)


THREE_APS = (
    _record("02:aa", 0.0, 0.0, 9000.0),
    _record("02:bb", 20.0, 0.0, 10500.0),
    _record("02:cc", 0.0, 20.0, 11200.0),
)
BOUNDS = Bounds(0.0, 0.0, 25.0, 25.0)


class TestLocalize:
    def test_noiseless_three_anchor_recovery(self):
        snap = _snapshot_at(Position(5.0, 5.0), THREE_APS)
        fix = localize(snap, THREE_APS, BOUNDS)
        assert fix.position.distance_to(Position(5.0, 5.0)) < 0.05
        assert fix.matched_ap_count == 3

    def test_grid_of_clients_recovered(self):
        for x in (2.0, 10.0, 18.0):
            for y in (2.0, 10.0, 18.0):
                snap = _snapshot_at(Position(x, y), THREE_APS)
                fix = localize(snap, THREE_APS, BOUNDS)
                assert fix.position.distance_to(Position(x, y)) < 0.05

    def test_two_matched_aps_underdetermined(self):
        snap = _snapshot_at(Position(5.0, 5.0), THREE_APS[:2])
        with pytest.raises(UnderdeterminedError) as exc:
            localize(snap, THREE_APS, BOUNDS)
        assert exc.value.matched == 2

    def test_unknown_bssids_skipped_but_counted(self):
        snap = _snapshot_at(Position(5.0, 5.0), THREE_APS)
        extra = snap.measurements + (ClientMeasurement(10000.0, -50.0, "02:ff"),)
        fix = localize(ClientSnapshot(extra, snap.label), THREE_APS, BOUNDS)
        assert fix.unknown_bssids == ("02:ff",)
        assert fix.matched_ap_count == 3

    def test_min_distinct_aps_config_floor(self):
        with pytest.raises(ValueError):
            ClientSolveConfig(min_distinct_aps=2)

    def test_translation_equivariance(self):
        offset_vec = (7.3, -3.1)
        client = Position(6.0, 9.0)
        snap = _snapshot_at(client, THREE_APS)
        fix = localize(snap, THREE_APS, BOUNDS)

        moved_records = tuple(
            _record(
                r.bssid,
                r.position.x_m + offset_vec[0],
                r.position.y_m + offset_vec[1],
                r.offset_ns,
            )
            for r in THREE_APS
        )
        moved_client = Position(client.x_m + offset_vec[0], client.y_m + offset_vec[1])
        moved_snap = _snapshot_at(moved_client, moved_records)
        moved_bounds = BOUNDS.translate(*offset_vec)
        moved_fix = localize(moved_snap, moved_records, moved_bounds)
        assert moved_fix.position.x_m - fix.position.x_m == pytest.approx(
            offset_vec[0], abs=1e-6
        )
        assert moved_fix.position.y_m - fix.position.y_m == pytest.approx(
            offset_vec[1], abs=1e-6
        )

    def test_measurement_permutation_invariance_exact(self):
        client = Position(11.0, 4.0)
        snap = _snapshot_at(client, THREE_APS, n_per_ap=7)
        fix = localize(snap, THREE_APS, BOUNDS)
        shuffled = list(snap.measurements)
        random.Random(3).shuffle(shuffled)
        fix2 = localize(ClientSnapshot(tuple(shuffled), snap.label), THREE_APS, BOUNDS)
        assert fix2.position == fix.position
        assert fix2.loss_ns2 == fix.loss_ns2

    def test_fourth_consistent_anchor_never_hurts(self):
        client = Position(8.0, 12.0)
        fourth = _record("02:dd", 20.0, 20.0, 9800.0)
        snap3 = _snapshot_at(client, THREE_APS)
        snap4 = _snapshot_at(client, THREE_APS + (fourth,))
        err3 = localize(snap3, THREE_APS, BOUNDS).position.distance_to(client)
        err4 = localize(snap4, THREE_APS + (fourth,), BOUNDS).position.distance_to(client)
        assert err4 <= err3 + 0.625

    def test_per_ap_residual_report(self):
        client = Position(5.0, 5.0)
        snap = _snapshot_at(client, THREE_APS, n_per_ap=3)
        fix = localize(snap, THREE_APS, BOUNDS)
        assert len(fix.per_ap) == 3
        for row in fix.per_ap:
            assert row.weight == 3
            assert abs(row.residual_ns) < 1.0
            assert row.distance_m == pytest.approx(
                client.distance_to(
                    next(r.position for r in THREE_APS if r.bssid == row.bssid)
                ),
                abs=0.1,
            )


class TestFixedSlopeVariant:
    def test_identical_on_los_records(self):
        snap = _snapshot_at(Position(7.0, 8.0), THREE_APS)
        a = localize(snap, THREE_APS, BOUNDS)
        b = localize_fixed_slope(snap, THREE_APS, BOUNDS)
        assert a.position == b.position
        assert a.loss_ns2 == b.loss_ns2

    def test_differs_when_slopes_inflated(self):
        nlos_records = tuple(
            _record(r.bssid, r.position.x_m, r.position.y_m, r.offset_ns, slope=1.5 * LOS)
            for r in THREE_APS
        )
        client = Position(6.0, 11.0)
        snap = _snapshot_at(client, nlos_records)
        good = localize(snap, nlos_records, BOUNDS)
        bad = localize_fixed_slope(snap, nlos_records, BOUNDS)
        assert good.position.distance_to(client) < 0.05
        assert bad.position.distance_to(client) > good.position.distance_to(client)

    def test_same_underdetermined_contract(self):
        snap = _snapshot_at(Position(5.0, 5.0), THREE_APS[:2])
        with pytest.raises(UnderdeterminedError):
            localize_fixed_slope(snap, THREE_APS, BOUNDS)


class TestAggregation:
    def test_uniform_duplication_matches_single_copies(self):
        client = Position(9.0, 6.0)
        single = _snapshot_at(client, THREE_APS, n_per_ap=1)
        tripled = _snapshot_at(client, THREE_APS, n_per_ap=3)
        a = localize(single, THREE_APS, BOUNDS)
        b = localize(tripled, THREE_APS, BOUNDS)
        assert a.position.distance_to(b.position) < 1e-9

    def test_weights_equal_measurement_counts(self):
        client = Position(9.0, 6.0)
        meas = (
            _snapshot_at(client, THREE_APS[:1], n_per_ap=5).measurements
            + _snapshot_at(client, THREE_APS[1:], n_per_ap=2).measurements
        )
        fix = localize(ClientSnapshot(meas, client), THREE_APS, BOUNDS)
        weights = {r.bssid: r.weight for r in fix.per_ap}
        assert weights == {"02:aa": 5, "02:bb": 2, "02:cc": 2}

    def test_solver_loss_not_above_quarter_meter_lattice(self, rng):
        # Independent oracle: exhaustive 0.25 m lattice on the client loss.
        client = Position(13.0, 9.0)
        snap = _snapshot_at(client, THREE_APS, n_per_ap=4)
        noisy = tuple(
            ClientMeasurement(m.rtt_ns + float(rng.normal(0, 5)), m.rssi_dbm, m.bssid)
            for m in snap.measurements
        )
        fix = localize(ClientSnapshot(noisy, client), THREE_APS, BOUNDS)

        groups = {}
        for m in noisy:
            groups.setdefault(m.bssid, []).append(m.rtt_ns)
        best = np.inf
        for gx in np.arange(0.0, 25.0 + 1e-9, 0.25):
            for gy in np.arange(0.0, 25.0 + 1e-9, 0.25):
                loss = 0.0
                for rec in THREE_APS:
                    vals = groups[rec.bssid]
                    mean = sum(vals) / len(vals)
                    d = Position(float(gx), float(gy)).distance_to(rec.position)
                    r = mean - (rec.slope_ns_per_m * d + rec.offset_ns)
                    loss += len(vals) * r * r
                best = min(best, loss)
        assert fix.loss_ns2 <= best * (1 + 1e-9)
