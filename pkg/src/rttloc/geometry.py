"""Planar geometry helpers: segment crossings and point-set diameter."""

from __future__ import annotations

import numpy as np


def segments_cross(p1, p2, q1, q2) -> bool:
    """True if open segments p1-p2 and q1-q2 properly intersect.

    Touching at an endpoint or mere collinear overlap does not count; wall
    crossing tests want strict straddling on both sides.
    """
    d1 = _ccw(q1, q2, p1)
    d2 = _ccw(q1, q2, p2)
    d3 = _ccw(p1, p2, q1)
    d4 = _ccw(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _ccw(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def crossings_to_point(px: np.ndarray, py: np.ndarray, target, wall) -> np.ndarray:
    """Per-source crossing indicator for segments (px_i, py_i) -> target.

    Vectorized over sources; returns a boolean array. ``target`` is (x, y);
    ``wall`` is ((x1, y1), (x2, y2)).
    """
    (wx1, wy1), (wx2, wy2) = wall
    tx, ty = target
    d1 = (wx2 - wx1) * (py - wy1) - (wy2 - wy1) * (px - wx1)
    d2 = (wx2 - wx1) * (ty - wy1) - (wy2 - wy1) * (tx - wx1)
    d3 = (tx - px) * (wy1 - py) - (ty - py) * (wx1 - px)
    d4 = (tx - px) * (wy2 - py) - (ty - py) * (wx2 - px)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull (Andrew's monotone chain) of an (n, 2) array, CCW order."""
    pts = np.unique(points, axis=0)
    if pts.shape[0] <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        chain: list[np.ndarray] = []
        for p in seq:
            while len(chain) >= 2 and _ccw(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    return np.asarray(lower[:-1] + upper[:-1])


def diameter(points: np.ndarray) -> float:
    """Largest pairwise distance within an (n, 2) point set, in meters."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] < 2:
        return 0.0
    hull = convex_hull(points)
    if hull.shape[0] < 2:
        return 0.0
    diff = hull[:, None, :] - hull[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    return float(np.sqrt(d2.max()))
