"""Backend equivalence and accuracy of the loss kernels.

The compiled extension and the numpy fallback must agree bit-for-bit; the
pairwise tree sum must track math.fsum closely.
"""

import math

import numpy as np
import pytest

from rttloc import _purepy, kernels

try:
    from rttloc import _native
except ImportError:
    _native = None

needs_native = pytest.mark.skipif(_native is None, reason="compiled backend not built")


def _workload(rng, n):
    sx = rng.uniform(0, 90, n)
    sy = rng.uniform(0, 40, n)
    st = rng.uniform(9000, 12500, n)
    return sx, sy, st


def test_pairwise_sum_known_values():
    assert kernels.pairwise_sum([1.0, 2.0, 3.0, 4.0, 5.0]) == 15.0
    assert kernels.pairwise_sum([]) == 0.0
    assert kernels.pairwise_sum([42.5]) == 42.5


def test_pairwise_sum_tracks_fsum(rng):
    for n in (1, 2, 3, 7, 64, 1001):
        vals = rng.normal(scale=1e6, size=n)
        assert kernels.pairwise_sum(vals) == pytest.approx(math.fsum(vals), rel=1e-12)


def test_pairwise_sum_purepy_fold_is_adjacent_pairs():
    # fold([a,b,c]) = (a+b) + c by construction
    a, b, c = 0.1, 0.2, 0.3
    assert _purepy.pairwise_sum(np.array([a, b, c])) == (a + b) + c


@needs_native
def test_pairwise_sum_backends_bit_identical(rng):
    for n in (1, 2, 3, 4, 5, 17, 256, 999, 4096):
        vals = np.ascontiguousarray(rng.normal(scale=1e3, size=n))
        assert _native.pairwise_sum(vals) == _purepy.pairwise_sum(vals)


@needs_native
def test_loss_point_backends_bit_identical(rng):
    for n in (1, 7, 500, 1001):
        sx, sy, st = _workload(rng, n)
        for _ in range(5):
            x = float(rng.uniform(0, 90))
            y = float(rng.uniform(0, 40))
            off = float(rng.uniform(8000, 12000))
            slope = float(rng.uniform(6.7, 13.0))
            assert _native.loss_point(sx, sy, st, x, y, off, slope) == _purepy.loss_point(
                sx, sy, st, x, y, off, slope
            )


@needs_native
def test_loss_grid_backends_bit_identical(rng):
    sx, sy, st = _workload(rng, 333)
    gx = np.ascontiguousarray(rng.uniform(0, 90, 57))
    gy = np.ascontiguousarray(rng.uniform(0, 40, 57))
    offs = np.arange(8000.0, 12000.0 + 1e-9, 250.0)
    expected = _purepy.loss_grid(sx, sy, st, gx, gy, offs, 6.9)
    out = np.empty((gx.size, offs.size))
    _native.loss_grid(sx, sy, st, gx, gy, offs, 6.9, out)
    assert np.array_equal(out, expected)


@needs_native
def test_client_kernels_backends_bit_identical(rng):
    k = 6
    ax = np.ascontiguousarray(rng.uniform(0, 50, k))
    ay = np.ascontiguousarray(rng.uniform(0, 30, k))
    aoff = np.ascontiguousarray(rng.uniform(8000, 12000, k))
    aslope = np.ascontiguousarray(rng.uniform(6.7, 13.0, k))
    art = np.ascontiguousarray(rng.uniform(9000, 12500, k))
    w = np.ascontiguousarray(rng.integers(1, 60, k).astype(float))
    assert _native.client_loss_point(
        ax, ay, aoff, aslope, art, w, 3.3, 4.4
    ) == _purepy.client_loss_point(ax, ay, aoff, aslope, art, w, 3.3, 4.4)
    gx = np.ascontiguousarray(rng.uniform(0, 50, 91))
    gy = np.ascontiguousarray(rng.uniform(0, 30, 91))
    expected = _purepy.client_loss_grid(ax, ay, aoff, aslope, art, w, gx, gy)
    out = np.empty(gx.size)
    _native.client_loss_grid(ax, ay, aoff, aslope, art, w, gx, gy, out)
    assert np.array_equal(out, expected)


@needs_native
def test_profile_loss_grid_backends_bit_identical(rng):
    sx, sy, st = _workload(rng, 451)
    gx = np.ascontiguousarray(rng.uniform(0, 90, 83))
    gy = np.ascontiguousarray(rng.uniform(0, 40, 83))
    exp_loss, exp_off = _purepy.profile_loss_grid(sx, sy, st, gx, gy, 6.9, 8000.0, 12000.0)
    loss = np.empty(gx.size)
    off = np.empty(gx.size)
    _native.profile_loss_grid(sx, sy, st, gx, gy, 6.9, 8000.0, 12000.0, loss, off)
    assert np.array_equal(loss, exp_loss)
    assert np.array_equal(off, exp_off)


def test_profile_loss_grid_dominates_offset_lattice(rng):
    # The profiled loss at a position can never exceed the best loss over
    # any offset grid at that position.
    sx, sy, st = _workload(rng, 211)
    gx = np.ascontiguousarray(rng.uniform(0, 90, 29))
    gy = np.ascontiguousarray(rng.uniform(0, 40, 29))
    offs = np.arange(8000.0, 12000.0 + 1e-9, 250.0)
    grid = kernels.loss_grid(sx, sy, st, gx, gy, offs, 6.9)
    prof, off = kernels.profile_loss_grid(sx, sy, st, gx, gy, 6.9, 8000.0, 12000.0)
    assert np.all(prof <= grid.min(axis=1) + 1e-9)
    assert np.all((off >= 8000.0) & (off <= 12000.0))


def test_profile_loss_grid_offset_is_clamped_mean(rng):
    sx, sy, st = _workload(rng, 64)
    gx = np.array([10.0])
    gy = np.array([20.0])
    _, off = kernels.profile_loss_grid(sx, sy, st, gx, gy, 6.9, 8000.0, 12000.0)
    d = np.sqrt((sx - 10.0) ** 2 + (sy - 20.0) ** 2)
    mean_r = float(np.mean(st - 6.9 * d))
    assert off[0] == pytest.approx(min(max(mean_r, 8000.0), 12000.0), rel=1e-12)


def test_loss_grid_matches_loss_point(rng):
    sx, sy, st = _workload(rng, 211)
    gx = np.ascontiguousarray(rng.uniform(0, 90, 23))
    gy = np.ascontiguousarray(rng.uniform(0, 40, 23))
    offs = np.arange(8000.0, 12000.0 + 1e-9, 500.0)
    grid = kernels.loss_grid(sx, sy, st, gx, gy, offs, 6.9)
    for i in (0, 11, 22):
        for j in (0, 4, 8):
            assert grid[i, j] == kernels.loss_point(
                sx, sy, st, gx[i], gy[i], offs[j], 6.9
            )


def test_client_loss_grid_matches_point(rng):
    k = 5
    ax = rng.uniform(0, 50, k)
    ay = rng.uniform(0, 30, k)
    aoff = rng.uniform(8000, 12000, k)
    aslope = rng.uniform(6.7, 13.0, k)
    art = rng.uniform(9000, 12500, k)
    w = rng.integers(1, 60, k).astype(float)
    gx = rng.uniform(0, 50, 17)
    gy = rng.uniform(0, 30, 17)
    grid = kernels.client_loss_grid(ax, ay, aoff, aslope, art, w, gx, gy)
    for i in (0, 8, 16):
        assert grid[i] == kernels.client_loss_point(
            ax, ay, aoff, aslope, art, w, gx[i], gy[i]
        )


def test_loss_point_brute_force_value():
    sx = np.array([0.0, 3.0])
    sy = np.array([0.0, 4.0])
    st = np.array([10010.0, 10020.0])
    # distances to (0,0): 0 and 5; predictions 10000 and 10000 + 5*2
    loss = kernels.loss_point(sx, sy, st, 0.0, 0.0, 10000.0, 2.0)
    assert loss == pytest.approx(10.0**2 + 10.0**2, rel=1e-12)
