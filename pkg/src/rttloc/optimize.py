"""Bounded derivative-free simplex descent used to refine grid candidates.

Hand-rolled rather than delegated to a library so that clamping semantics,
tie-breaking, and therefore byte-level reproducibility are under this
package's control. Standard Nelder-Mead coefficients (reflect 1, expand 2,
contract 0.5, shrink 0.5); every candidate vertex is clamped into the box
before evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True, slots=True)
class SimplexResult:
    x: np.ndarray
    loss: float
    iterations: int
    converged: bool


def nelder_mead_bounded(
    func: Callable[[np.ndarray], float],
    x0: Sequence[float],
    bounds: Sequence[tuple[float, float]],
    step: Sequence[float],
    max_iters: int = 500,
    ftol: float = 1e-10,
) -> SimplexResult:
    """Minimize func over a box, starting a simplex at x0.

    Convergence: the loss spread across the simplex falls below
    ftol * max(1, |best loss|). The best vertex never worsens, so the
    result is always <= func(clamp(x0)).
    """
    lo = np.asarray([b[0] for b in bounds], dtype=np.float64)
    hi = np.asarray([b[1] for b in bounds], dtype=np.float64)
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")
    x0 = np.asarray(x0, dtype=np.float64)
    step = np.asarray(step, dtype=np.float64)
    n = x0.shape[0]

    def clamp(p: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(p, lo), hi)

    verts = [clamp(x0)]
    for i in range(n):
        p = x0.copy()
        # Step away from a bound if stepping toward it would collapse the vertex.
        if x0[i] + step[i] <= hi[i]:
            p[i] = x0[i] + step[i]
        else:
            p[i] = x0[i] - step[i]
        verts.append(clamp(p))
    fvals = [func(v) for v in verts]

    def sort_simplex():
        order = sorted(range(n + 1), key=lambda k: (fvals[k], tuple(verts[k])))
        return [verts[k] for k in order], [fvals[k] for k in order]

    verts, fvals = sort_simplex()
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        best, worst = fvals[0], fvals[-1]
        if worst - best <= ftol * max(1.0, abs(best)):
            converged = True
            break

        centroid = np.zeros(n)
        for v in verts[:-1]:
            centroid += v
        centroid /= n

        reflected = clamp(centroid + (centroid - verts[-1]))
        f_r = func(reflected)
        if fvals[0] <= f_r < fvals[-2]:
            verts[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[0]:
            expanded = clamp(centroid + 2.0 * (centroid - verts[-1]))
            f_e = func(expanded)
            if f_e < f_r:
                verts[-1], fvals[-1] = expanded, f_e
            else:
                verts[-1], fvals[-1] = reflected, f_r
        else:
            if f_r < fvals[-1]:
                contracted = clamp(centroid + 0.5 * (reflected - centroid))
            else:
                contracted = clamp(centroid - 0.5 * (centroid - verts[-1]))
            f_c = func(contracted)
            if f_c < min(f_r, fvals[-1]):
                verts[-1], fvals[-1] = contracted, f_c
            else:
                # Shrink toward the best vertex.
                for k in range(1, n + 1):
                    verts[k] = clamp(verts[0] + 0.5 * (verts[k] - verts[0]))
                    fvals[k] = func(verts[k])
        verts, fvals = sort_simplex()

    return SimplexResult(x=verts[0], loss=fvals[0], iterations=it, converged=converged)
