"""Backend selection for the loss kernels.

Prefers the compiled extension (rttloc._native) and falls back to the numpy
implementation. The two are bit-compatible, so which backend is active never
changes any result; it only changes speed. Set RTTLOC_BACKEND=python or
=native to force a backend (native raises if the extension is missing).

benchmarks/bench_kernels.py compares the two backends on representative
workloads.
"""

from __future__ import annotations

import os

import numpy as np

from . import _purepy

_requested = os.environ.get("RTTLOC_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _purepy
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        _impl = _purepy
        BACKEND = "python"


def _arr(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def pairwise_sum(values) -> float:
    """Deterministic adjacent-pair tree sum of a 1-D array."""
    return float(_impl.pairwise_sum(_arr(values)))


def loss_point(sx, sy, st, x, y, offset_ns, slope) -> float:
    """Sum of squared RTT residuals at one (x, y, offset) candidate."""
    return float(
        _impl.loss_point(
            _arr(sx), _arr(sy), _arr(st), float(x), float(y), float(offset_ns), float(slope)
        )
    )


def loss_grid(sx, sy, st, gx, gy, offsets, slope) -> np.ndarray:
    """Loss at every (grid point, offset) pair; shape (len(gx), len(offsets))."""
    sx, sy, st = _arr(sx), _arr(sy), _arr(st)
    gx, gy, offsets = _arr(gx), _arr(gy), _arr(offsets)
    if _impl is _purepy:
        return _purepy.loss_grid(sx, sy, st, gx, gy, offsets, float(slope))
    out = np.empty((gx.shape[0], offsets.shape[0]), dtype=np.float64)
    _impl.loss_grid(sx, sy, st, gx, gy, offsets, float(slope), out)
    return out


def profile_loss_grid(sx, sy, st, gx, gy, slope, off_lo, off_hi):
    """Per-grid-point loss with the offset profiled out; returns (loss, offset)."""
    sx, sy, st = _arr(sx), _arr(sy), _arr(st)
    gx, gy = _arr(gx), _arr(gy)
    if _impl is _purepy:
        return _purepy.profile_loss_grid(
            sx, sy, st, gx, gy, float(slope), float(off_lo), float(off_hi)
        )
    loss = np.empty(gx.shape[0], dtype=np.float64)
    off = np.empty(gx.shape[0], dtype=np.float64)
    _impl.profile_loss_grid(
        sx, sy, st, gx, gy, float(slope), float(off_lo), float(off_hi), loss, off
    )
    return loss, off


def client_loss_point(ax, ay, aoff, aslope, art, weights, x, y) -> float:
    """Weighted per-anchor squared-residual loss at one (x, y)."""
    return float(
        _impl.client_loss_point(
            _arr(ax), _arr(ay), _arr(aoff), _arr(aslope), _arr(art), _arr(weights),
            float(x), float(y),
        )
    )


def client_loss_grid(ax, ay, aoff, aslope, art, weights, gx, gy) -> np.ndarray:
    """client_loss_point at every grid point; shape (len(gx),)."""
    ax, ay, aoff = _arr(ax), _arr(ay), _arr(aoff)
    aslope, art, weights = _arr(aslope), _arr(art), _arr(weights)
    gx, gy = _arr(gx), _arr(gy)
    if _impl is _purepy:
        return _purepy.client_loss_grid(ax, ay, aoff, aslope, art, weights, gx, gy)
    out = np.empty(gx.shape[0], dtype=np.float64)
    _impl.client_loss_grid(ax, ay, aoff, aslope, art, weights, gx, gy, out)
    return out
