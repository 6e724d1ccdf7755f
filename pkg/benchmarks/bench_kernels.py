#!/usr/bin/env python3
"""Benchmark the compiled loss kernels against the numpy fallback.

Workloads mirror the real solver hot paths: the coarse anchor search
(profiled-offset grid), the full (position x offset) lattice used by the
oracle tests, the simplex objective (single-point loss), and the client
grid. Verifies bit-identical outputs while timing.

Usage: python benchmarks/bench_kernels.py [--samples N] [--repeat K]
"""

import argparse
import time

import numpy as np

from rttloc import _purepy

try:
    from rttloc import _native
except ImportError:
    _native = None


def _timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=5000, help="ranging samples")
    parser.add_argument("--repeat", type=int, default=3, help="timing repeats")
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    n = args.samples
    sx = rng.uniform(0, 94, n)
    sy = rng.uniform(0, 37, n)
    st = rng.uniform(9000, 12500, n)

    # Floorplan-A-sized coarse lattice and oracle-sized fine lattice.
    cg = np.meshgrid(np.arange(0, 94.2, 2.0), np.arange(0, 37.5, 2.0), indexing="ij")
    cgx, cgy = (np.ascontiguousarray(a.ravel()) for a in cg)
    fg = np.meshgrid(np.arange(0, 30.01, 0.25), np.arange(0, 30.01, 0.25), indexing="ij")
    fgx, fgy = (np.ascontiguousarray(a.ravel()) for a in fg)
    offs = np.arange(8000.0, 12000.0 + 1e-9, 250.0)

    k = 9
    ax = rng.uniform(0, 94, k)
    ay = rng.uniform(0, 37, k)
    aoff = rng.uniform(8000, 12000, k)
    aslope = rng.uniform(6.7, 10.0, k)
    art = rng.uniform(9000, 12500, k)
    weights = rng.integers(1, 40, k).astype(float)

    def bench(name, py_fn, nat_fn, equal):
        t_py, out_py = _timeit(py_fn, args.repeat)
        line = f"{name:34s} python {t_py * 1e3:9.2f} ms"
        if _native is not None:
            t_nat, out_nat = _timeit(nat_fn, args.repeat)
            line += f"   native {t_nat * 1e3:9.2f} ms   speedup {t_py / t_nat:6.1f}x"
            assert equal(out_py, out_nat), f"{name}: backend results differ"
        print(line)

    print(f"samples={n}, coarse grid={cgx.size} pts, fine grid={fgx.size} pts, "
          f"offsets={offs.size}")
    if _native is None:
        print("compiled backend not available; timing fallback only")

    def nat_profile():
        loss = np.empty(cgx.size)
        off = np.empty(cgx.size)
        _native.profile_loss_grid(sx, sy, st, cgx, cgy, 6.9, 8000.0, 12000.0, loss, off)
        return loss, off

    bench(
        "profile_loss_grid (coarse search)",
        lambda: _purepy.profile_loss_grid(sx, sy, st, cgx, cgy, 6.9, 8000.0, 12000.0),
        nat_profile,
        lambda a, b: np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]),
    )

    def nat_grid():
        out = np.empty((fgx.size, offs.size))
        _native.loss_grid(sx[:500], sy[:500], st[:500], fgx, fgy, offs, 6.9, out)
        return out

    bench(
        "loss_grid (oracle lattice, n=500)",
        lambda: _purepy.loss_grid(sx[:500], sy[:500], st[:500], fgx, fgy, offs, 6.9),
        nat_grid,
        np.array_equal,
    )

    def py_points():
        acc = 0.0
        for i in range(200):
            acc += _purepy.loss_point(sx, sy, st, 10.0 + i * 0.1, 20.0, 9500.0, 6.9)
        return acc

    def nat_points():
        acc = 0.0
        for i in range(200):
            acc += _native.loss_point(sx, sy, st, 10.0 + i * 0.1, 20.0, 9500.0, 6.9)
        return acc

    bench("loss_point x200 (simplex descent)", py_points, nat_points,
          lambda a, b: a == b)

    def nat_client():
        out = np.empty(fgx.size)
        _native.client_loss_grid(ax, ay, aoff, aslope, art, weights, fgx, fgy, out)
        return out

    bench(
        "client_loss_grid (fine lattice)",
        lambda: _purepy.client_loss_grid(ax, ay, aoff, aslope, art, weights, fgx, fgy),
        nat_client,
        np.array_equal,
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
