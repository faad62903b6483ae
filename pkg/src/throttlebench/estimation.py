"""Empirical price records and the biased reward/cost estimates built on them.

The uniform empirical-CDF deviation bound gives a distribution-free radius
``epsilon = sqrt((ln 2 + 2 ln T) / (2 n))`` after ``n`` observed prices over a
horizon of ``T`` rounds.  Reward estimates are biased up by ``epsilon * v`` and
cost estimates down by ``2 * epsilon * v`` so that, on the high-probability
event, the true curves are sandwiched:

    r(v) <= r_est(v) <= r(v) + 2 eps v
    c(v) - 4 eps v <= c_est(v) <= c(v)

A negative cost estimate is legal and returned as-is; clipping it would change
the dual dynamics that consume it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)


def dkw_epsilon(sample_count: int, horizon: int) -> float:
    """Confidence radius sqrt((ln 2 + 2 ln T) / (2 n)); halves when n quadruples."""
    if sample_count < 1:
        raise ValueError("need at least one sample")
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    return math.sqrt((LN2 + 2.0 * math.log(horizon)) / (2.0 * sample_count))


@dataclass(frozen=True)
class ConfidenceRadius:
    epsilon: float
    sample_count: int
    horizon: int

    @classmethod
    def from_counts(cls, sample_count: int, horizon: int) -> "ConfidenceRadius":
        return cls(dkw_epsilon(sample_count, horizon), sample_count, horizon)


class SampleStore:
    """Multiset of observed prices.

    Stored as per-price counts; every estimate is a function of the multiset
    only, so insertion order can never matter.
    """

    __slots__ = ("_counts", "count")

    def __init__(self):
        self._counts: dict[float, int] = {}
        self.count = 0

    def add(self, price: float) -> None:
        self._counts[price] = self._counts.get(price, 0) + 1
        self.count += 1

    def items_sorted(self):
        return sorted(self._counts.items())

    def prices(self):
        """All stored prices, expanded, in ascending order."""
        out = []
        for p, n in self.items_sorted():
            out.extend([p] * n)
        return out


def estimate_reward(v: float, store: SampleStore, eps: float) -> float:
    """Empirical mean of (v - p)^+ plus the upward bias eps * v."""
    n = store.count
    if n == 0:
        raise ValueError("empty sample store")
    acc = 0.0
    for p, cnt in store.items_sorted():
        if v > p:
            acc += cnt * (v - p)
    return acc / n + eps * v


def estimate_cost(v: float, store: SampleStore, eps: float) -> float:
    """Empirical mean of p * [v >= p] minus the downward bias 2 * eps * v.

    May be negative; callers rely on the raw value.
    """
    n = store.count
    if n == 0:
        raise ValueError("empty sample store")
    acc = 0.0
    for p, cnt in store.items_sorted():
        if v >= p:
            acc += cnt * p
    return acc / n - 2.0 * eps * v
