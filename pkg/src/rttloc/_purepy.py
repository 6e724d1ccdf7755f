"""Numpy implementation of the loss kernels.

This is the fallback used when the compiled extension (rttloc._native) is
unavailable. Both backends perform the same IEEE-754 operations in the same
order -- including the adjacent-pair folding used for every sum -- so their
results are bit-identical, and outputs do not depend on which backend is
selected.

Residual convention, shared by all kernels:

    d_i = sqrt((sx_i - x)^2 + (sy_i - y)^2)
    r_i = t_i - (slope * d_i + offset)
    loss = fold(r_i^2)          (adjacent-pair tree sum)
"""

from __future__ import annotations

import numpy as np

# Per-chunk scratch budget for grid evaluation, in float64 elements.
_CHUNK_BUDGET = 8_000_000


def pairwise_sum(values) -> float:
    """Sum of a 1-D array via adjacent-pair folding.

    fold([a0, a1, a2, a3, a4]) = ((a0+a1) + (a2+a3)) + a4 and so on: each
    level adds adjacent pairs and carries an odd tail element unchanged.
    The tree depends only on element order, so the result is deterministic
    and has O(log n) rounding depth.
    """
    a = np.ascontiguousarray(values, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("pairwise_sum expects a 1-D array")
    if a.size == 0:
        return 0.0
    return float(_fold_last(a.reshape(1, -1))[0])


def _fold_last(a: np.ndarray) -> np.ndarray:
    """Adjacent-pair fold along the last axis; returns shape a.shape[:-1]."""
    while a.shape[-1] > 1:
        if a.shape[-1] % 2:
            a = np.concatenate((a[..., :-1:2] + a[..., 1::2], a[..., -1:]), axis=-1)
        else:
            a = a[..., ::2] + a[..., 1::2]
    return a[..., 0]


def loss_point(sx, sy, st, x: float, y: float, offset_ns: float, slope: float) -> float:
    """Sum of squared RTT residuals for one candidate (x, y, offset)."""
    dx = sx - x
    dy = sy - y
    d = np.sqrt(dx * dx + dy * dy)
    pred = slope * d
    r = st - (pred + offset_ns)
    return float(_fold_last((r * r).reshape(1, -1))[0])


def loss_grid(sx, sy, st, gx, gy, offsets, slope: float) -> np.ndarray:
    """Loss at every (grid point, offset) pair.

    Returns an array of shape (len(gx), len(offsets)). Distances are
    computed once per grid point and reused across offsets.
    """
    npts = gx.shape[0]
    noff = offsets.shape[0]
    n = sx.shape[0]
    out = np.empty((npts, noff), dtype=np.float64)
    if npts == 0:
        return out
    chunk = max(1, _CHUNK_BUDGET // max(1, noff * n))
    for s in range(0, npts, chunk):
        e = min(npts, s + chunk)
        dx = sx[None, :] - gx[s:e, None]
        dy = sy[None, :] - gy[s:e, None]
        d = np.sqrt(dx * dx + dy * dy)
        pred = slope * d
        r = st[None, None, :] - (pred[:, None, :] + offsets[None, :, None])
        out[s:e] = _fold_last(r * r)
    return out


def profile_loss_grid(
    sx, sy, st, gx, gy, slope: float, off_lo: float, off_hi: float
) -> tuple[np.ndarray, np.ndarray]:
    """Loss at each grid point with the offset profiled out analytically.

    For fixed (x, y) the loss is quadratic in the offset, minimized at
    mean(t_i - slope*d_i) clamped into [off_lo, off_hi]. Returns
    (loss, offset) arrays of shape (len(gx),).
    """
    npts = gx.shape[0]
    n = sx.shape[0]
    loss = np.empty(npts, dtype=np.float64)
    offset = np.empty(npts, dtype=np.float64)
    if npts == 0:
        return loss, offset
    if n == 0:
        loss[:] = 0.0
        offset[:] = off_lo
        return loss, offset
    chunk = max(1, _CHUNK_BUDGET // max(1, n))
    for s in range(0, npts, chunk):
        e = min(npts, s + chunk)
        dx = sx[None, :] - gx[s:e, None]
        dy = sy[None, :] - gy[s:e, None]
        d = np.sqrt(dx * dx + dy * dy)
        r = st[None, :] - slope * d
        m = _fold_last(r) / n
        off = np.minimum(np.maximum(m, off_lo), off_hi)
        resid = r - off[:, None]
        loss[s:e] = _fold_last(resid * resid)
        offset[s:e] = off
    return loss, offset


def client_loss_point(ax, ay, aoff, aslope, art, weights, x: float, y: float) -> float:
    """Weighted squared-residual loss against per-anchor ranging models.

    Each anchor j contributes weights[j] * (art[j] - (aslope[j]*d_j + aoff[j]))^2,
    where the weight is the number of raw measurements aggregated into art[j].
    """
    dx = ax - x
    dy = ay - y
    d = np.sqrt(dx * dx + dy * dy)
    pred = aslope * d
    r = art - (pred + aoff)
    return float(_fold_last((weights * (r * r)).reshape(1, -1))[0])


def client_loss_grid(ax, ay, aoff, aslope, art, weights, gx, gy) -> np.ndarray:
    """client_loss_point evaluated at every grid point; shape (len(gx),)."""
    dx = ax[None, :] - gx[:, None]
    dy = ay[None, :] - gy[:, None]
    d = np.sqrt(dx * dx + dy * dy)
    pred = aslope[None, :] * d
    r = art[None, :] - (pred + aoff[None, :])
    return _fold_last(weights[None, :] * (r * r))
