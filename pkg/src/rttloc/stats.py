"""Error statistics and empirical CDFs for the evaluation harness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True, slots=True)
class ErrorStats:
    """Summary of a set of localization errors, in meters.

    ``std_m`` is the population standard deviation. ``cdf`` holds one
    (error, cumulative fraction) pair per distinct error value; the final
    fraction is 1. The median follows the usual midpoint rule for even
    counts, which equals inverting the CDF at 0.5: the first error whose
    fraction exceeds 0.5, or, when a fraction hits 0.5 exactly, the midpoint
    of that error and the next distinct one.
    """

    mean_m: float
    median_m: float
    std_m: float
    count: int
    cdf: tuple[tuple[float, float], ...]


def compute_stats(errors: Sequence[float]) -> ErrorStats:
    arr = np.asarray(list(errors), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("compute_stats requires at least one error value")
    values, counts = np.unique(arr, return_counts=True)
    fractions = np.cumsum(counts) / arr.size
    cdf = tuple((float(v), float(f)) for v, f in zip(values, fractions))
    return ErrorStats(
        mean_m=float(np.mean(arr)),
        median_m=float(np.median(arr)),
        std_m=float(np.std(arr)),
        count=int(arr.size),
        cdf=cdf,
    )


def median_from_cdf(cdf: Sequence[tuple[float, float]]) -> float:
    """Invert an empirical CDF at 0.5 per the rule stated on ErrorStats."""
    for i, (value, fraction) in enumerate(cdf):
        if fraction == 0.5:
            return 0.5 * (value + cdf[i + 1][0])
        if fraction > 0.5:
            return value
    raise ValueError("malformed cdf: no fraction reaches 0.5")


def mean_from_cdf(cdf: Sequence[tuple[float, float]]) -> float:
    """Reconstruct the mean from CDF increments."""
    total = 0.0
    prev = 0.0
    for value, fraction in cdf:
        total += value * (fraction - prev)
        prev = fraction
    return total


def stats_to_dict(stats: ErrorStats | None) -> dict | None:
    if stats is None:
        return None
    return {
        "mean_m": stats.mean_m,
        "median_m": stats.median_m,
        "std_m": stats.std_m,
        "count": stats.count,
        "cdf": [[e, f] for e, f in stats.cdf],
    }
