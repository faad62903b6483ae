"""Log-log scaling fits for regret curves."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

BOOTSTRAP_SEED = 1783452


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    ci_low: float
    ci_high: float
    n_points: int
    n_excluded: int

    @property
    def ci(self) -> tuple:
        return (self.ci_low, self.ci_high)


def fit_slope(points, n_boot: int = 1000, seed: int = BOOTSTRAP_SEED) -> SlopeFit:
    """Least-squares slope of log(regret) against log(T), with a residual
    bootstrap confidence interval (2.5/97.5 percentiles over ``n_boot``
    refits).  Nonpositive regret points are dropped with a warning; fewer
    than four usable points is an error.
    """
    usable = [(t, r) for (t, r) in points if r > 0]
    excluded = len(list(points)) - len(usable)
    if excluded:
        warnings.warn(f"fit_slope: dropped {excluded} nonpositive regret point(s)")
    if len(usable) < 4:
        raise ValueError(f"need at least 4 positive points, have {len(usable)}")
    x = np.log([t for t, _ in usable])
    y = np.log([r for _, r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    rng = np.random.default_rng(seed)
    boots = np.empty(n_boot)
    for b in range(n_boot):
        y_star = slope * x + intercept + rng.choice(resid, size=resid.size, replace=True)
        boots[b] = np.polyfit(x, y_star, 1)[0]
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return SlopeFit(float(slope), float(lo), float(hi), len(usable), excluded)
