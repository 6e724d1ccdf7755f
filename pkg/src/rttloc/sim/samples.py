"""Synthetic ranging measurements along trajectories and at static points.

Measurement model, per waypoint tick and in-range anchor:

    rssi  = tx_at_1m - 10 * ple * log10(max(d, 1)) - sum(wall attenuations)
    rtt   = offset + slope * d + sum(wall excess delays) + N(0, sigma)
    slope = anchor NLOS slope if the path crosses any wall, else 2/c

Samples below the RSSI cutoff are dropped; surviving RTTs are quantized to
the sniffer clock tick (round to nearest). Sample positions are the
*estimated* trajectory positions -- the solver never sees ground truth.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import ROUND_TRIP_NS_PER_M, Position, RangingSample, tick_duration_ns
from ..geometry import crossings_to_point, segments_cross
from .trajectory import Trajectory
from .world import TrueAp, WorldSpec


def count_crossings(world: WorldSpec, a: Position, b: Position) -> int:
    """Number of wall segments properly crossed by the straight path a -> b."""
    n = 0
    pa = (a.x_m, a.y_m)
    pb = (b.x_m, b.y_m)
    for w in world.walls:
        if segments_cross(pa, pb, w.p1, w.p2):
            n += 1
    return n


def _path_effects(
    world: WorldSpec, px: np.ndarray, py: np.ndarray, ap: TrueAp
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(crossing count, attenuation dB, excess delay ns) per source point."""
    n = px.shape[0]
    crossings = np.zeros(n, dtype=np.int64)
    atten = np.zeros(n)
    excess = np.zeros(n)
    target = (ap.position.x_m, ap.position.y_m)
    for w in world.walls:
        hit = crossings_to_point(px, py, target, (w.p1, w.p2))
        crossings += hit
        atten += hit * w.attenuation_db
        excess += hit * w.excess_delay_ns_per_crossing
    return crossings, atten, excess


def _quantize(rtt_ns: np.ndarray, clock_hz: float) -> np.ndarray:
    tick = tick_duration_ns(clock_hz)
    q = np.floor(rtt_ns / tick + 0.5) * tick
    return np.maximum(q, tick)


def synthesize_samples(
    world: WorldSpec, traj: Trajectory, seed: int
) -> list[RangingSample]:
    """Ranging samples for every (waypoint, in-range anchor) pair.

    Deterministic for a given (world, trajectory, seed); emission order is
    waypoint-major, anchors in BSSID order within a tick.
    """
    m = world.measurement
    rng = np.random.default_rng(seed)
    n = len(traj)
    tx = traj.true_xy[:, 0]
    ty = traj.true_xy[:, 1]

    aps = sorted(world.aps, key=lambda a: a.bssid)
    per_ap: list[tuple[TrueAp, np.ndarray, np.ndarray, np.ndarray]] = []
    for ap in aps:
        noise = rng.normal(0.0, m.noise_sigma_ns, size=n) if m.noise_sigma_ns > 0 else np.zeros(n)
        dx = tx - ap.position.x_m
        dy = ty - ap.position.y_m
        d = np.sqrt(dx * dx + dy * dy)
        crossings, atten, excess = _path_effects(world, tx, ty, ap)
        rssi = (
            ap.tx_rssi_dbm_at_1m
            - 10.0 * m.path_loss_exponent * np.log10(np.maximum(d, 1.0))
            - atten
        )
        if m.nlos_slope_enabled:
            slope = np.where(crossings > 0, ap.nlos_slope_ns_per_m, ROUND_TRIP_NS_PER_M)
        else:
            slope = np.full(n, ROUND_TRIP_NS_PER_M)
        rtt = ap.offset_ns + slope * d + noise
        if m.wall_excess_enabled:
            rtt = rtt + excess
        rtt = _quantize(rtt, m.clock_hz)
        mask = rssi >= m.rssi_cutoff_dbm
        per_ap.append((ap, rtt, rssi, mask))

    out: list[RangingSample] = []
    for k in range(n):
        pos = Position(float(traj.est_xy[k, 0]), float(traj.est_xy[k, 1]))
        t_s = float(traj.time_s[k])
        for ap, rtt, rssi, mask in per_ap:
            if mask[k]:
                out.append(
                    RangingSample(
                        position=pos,
                        rtt_ns=float(rtt[k]),
                        rssi_dbm=float(rssi[k]),
                        bssid=ap.bssid,
                        trajectory_id=traj.trajectory_id,
                        time_s=t_s,
                    )
                )
    return out


def in_range_aps(world: WorldSpec, point: Position) -> list[TrueAp]:
    """Anchors whose deterministic RSSI at ``point`` clears the cutoff."""
    m = world.measurement
    out = []
    for ap in sorted(world.aps, key=lambda a: a.bssid):
        d = point.distance_to(ap.position)
        _, atten, _ = _path_effects(
            world, np.asarray([point.x_m]), np.asarray([point.y_m]), ap
        )
        rssi = (
            ap.tx_rssi_dbm_at_1m
            - 10.0 * m.path_loss_exponent * math.log10(max(d, 1.0))
            - float(atten[0])
        )
        if rssi >= m.rssi_cutoff_dbm:
            out.append(ap)
    return out


def synthesize_snapshot_measurements(
    world: WorldSpec, point: Position, count: int, seed: int
) -> list[tuple[float, float, str]]:
    """Static-client measurements (rtt_ns, rssi_dbm, bssid) at one test point.

    Repeats measurement rounds over all in-range anchors until at least
    ``count`` readings are collected (full rounds; no partial trimming).
    """
    m = world.measurement
    rng = np.random.default_rng(seed)
    aps = in_range_aps(world, point)
    if not aps:
        return []
    rounds = max(1, math.ceil(count / len(aps)))

    per_ap: list[tuple[TrueAp, np.ndarray, float]] = []
    px = np.asarray([point.x_m])
    py = np.asarray([point.y_m])
    for ap in aps:
        noise = (
            rng.normal(0.0, m.noise_sigma_ns, size=rounds)
            if m.noise_sigma_ns > 0
            else np.zeros(rounds)
        )
        d = point.distance_to(ap.position)
        crossings, atten, excess = _path_effects(world, px, py, ap)
        rssi = (
            ap.tx_rssi_dbm_at_1m
            - 10.0 * m.path_loss_exponent * math.log10(max(d, 1.0))
            - float(atten[0])
        )
        slope = (
            ap.nlos_slope_ns_per_m
            if (int(crossings[0]) > 0 and m.nlos_slope_enabled)
            else ROUND_TRIP_NS_PER_M
        )
        rtt = ap.offset_ns + slope * d + noise
        if m.wall_excess_enabled:
            rtt = rtt + float(excess[0])
        rtt = _quantize(rtt, m.clock_hz)
        per_ap.append((ap, rtt, rssi))

    out: list[tuple[float, float, str]] = []
    for r in range(rounds):
        for ap, rtt, rssi in per_ap:
            out.append((float(rtt[r]), float(rssi), ap.bssid))
    return out
