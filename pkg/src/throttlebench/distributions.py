"""Finite-support distributions and the per-round reward/cost curves they induce.

Values and competing bids live on a bounded money interval [0, ceiling].
Everything here is exact finite-sum arithmetic; sampling is the only
stochastic operation and is driven entirely by a caller-supplied generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WEIGHT_TOL = 1e-12


class DiscreteDistribution:
    """Probability distribution on finitely many money points.

    Atoms are kept sorted ascending with distinct points. Weights must be
    nonnegative and sum to one within ``WEIGHT_TOL``.
    """

    __slots__ = ("points", "weights", "ceiling", "_cum")

    def __init__(self, points, weights, ceiling=None):
        pts = np.asarray(points, dtype=float)
        wts = np.asarray(weights, dtype=float)
        if pts.ndim != 1 or wts.ndim != 1 or pts.size != wts.size or pts.size == 0:
            raise ValueError("points and weights must be non-empty 1-d arrays of equal length")
        order = np.argsort(pts, kind="stable")
        pts = pts[order]
        wts = wts[order]
        if np.any(np.diff(pts) <= 0):
            raise ValueError("support points must be distinct")
        if np.any(wts < 0):
            raise ValueError("weights must be nonnegative")
        total = float(wts.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        if ceiling is None:
            ceiling = float(pts[-1])
        ceiling = float(ceiling)
        if pts[0] < 0.0 or pts[-1] > ceiling:
            raise ValueError("support must lie in [0, ceiling]")
        self.points = pts
        self.weights = wts
        self.ceiling = ceiling
        self._cum = np.cumsum(wts)

    @classmethod
    def uniform(cls, points, ceiling=None):
        pts = np.asarray(points, dtype=float)
        return cls(pts, np.full(pts.size, 1.0 / pts.size), ceiling)

    @classmethod
    def singleton(cls, point, ceiling=None):
        return cls([point], [1.0], ceiling)

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
            and self.ceiling == other.ceiling
        )

    def __repr__(self):
        atoms = ", ".join(f"{p:g}:{w:g}" for p, w in zip(self.points, self.weights))
        return f"DiscreteDistribution({atoms}; ceiling={self.ceiling:g})"

    def sample_index(self, rng, size=None):
        """Atom indices drawn with the atom weights (inverse-CDF on uniforms)."""
        u = rng.random(size)
        idx = np.searchsorted(self._cum, u, side="right")
        return np.minimum(idx, len(self) - 1)

    def sample(self, rng, size=None):
        return self.points[self.sample_index(rng, size)]

    def cdf(self, x):
        """P[point <= x], right-continuous."""
        idx = np.searchsorted(self.points, x, side="right")
        cum = np.concatenate(([0.0], self._cum))
        return cum[idx]

    def mean(self):
        return float(np.dot(self.points, self.weights))

    def to_lines(self):
        """One ``point weight`` pair per line; round-trips exactly via repr."""
        return [f"{float(p)!r} {float(w)!r}" for p, w in zip(self.points, self.weights)]

    @classmethod
    def from_lines(cls, lines, ceiling=None):
        pts, wts = [], []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            a, b = line.split()
            pts.append(float(a))
            wts.append(float(b))
        return cls(pts, wts, ceiling)


@dataclass(frozen=True)
class InterimCurves:
    """Expected one-round reward and spend of a truthful participant, as a
    function of the value, induced by a price distribution.

    reward(v) = sum_j w_j * (v - p_j)^+          (nondecreasing, convex, 0 at 0)
    cost(v)   = sum_j w_j * p_j * [v >= p_j]     (nondecreasing, 0 at 0)

    A tie v == p counts as a win at payment p.
    """

    price_dist: DiscreteDistribution

    def reward(self, v):
        v = np.asarray(v, dtype=float)
        terms = np.maximum(v[..., None] - self.price_dist.points, 0.0)
        out = terms @ self.price_dist.weights
        return float(out) if out.ndim == 0 else out

    def cost(self, v):
        v = np.asarray(v, dtype=float)
        pts = self.price_dist.points
        terms = np.where(v[..., None] >= pts, pts, 0.0)
        out = terms @ self.price_dist.weights
        return float(out) if out.ndim == 0 else out

    def win_probability(self, v):
        return self.price_dist.cdf(v)


def interim_curves(price_dist: DiscreteDistribution) -> InterimCurves:
    """Exact reward/cost curves for a finite-support price distribution."""
    return InterimCurves(price_dist)
