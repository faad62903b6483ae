"""Bidding strategies: dual-gradient throttling (OGD-CB), adaptive pacing,
and static randomized throttling.

Every strategy exposes
    decide(t, value, remaining) -> (decision, bid)
    observe(t, price_or_None, outcome)
and is consulted only while the episode budget allows entry.  Throttling
strategies bid the value itself when entering; pacing bids the shaded value.
"""

from __future__ import annotations

import math

import numpy as np

from .estimation import SampleStore, dkw_epsilon, estimate_cost, estimate_reward


def entering_rate_floor(budget_rate: float, value_ceiling: float) -> float:
    """Guaranteed participation rate of OGD-CB under partial feedback:
    min{(1/2)(rho/vmax)^2, (sqrt(2)/4)(rho/vmax)}."""
    ratio = budget_rate / value_ceiling
    return min(0.5 * ratio * ratio, (math.sqrt(2.0) / 4.0) * ratio)


class Strategy:
    """Base class; subclasses override decide and, if needed, observe."""

    name = "strategy"

    def start_episode(self, rng) -> None:
        """Called once before round 1 with the episode's private generator."""

    def decide(self, t: int, value: float, remaining: float):
        raise NotImplementedError

    def observe(self, t: int, price, outcome) -> None:
        """Feedback hook; price is None when the round's bid was not revealed."""

    def __repr__(self):
        return f"<{type(self).__name__}>"


class OgdCb(Strategy):
    """Throttling by a dual variable updated with projected online gradient
    descent, acting on optimistic reward / pessimistic cost estimates.

    Round 1 is a pure exploration round (enter unconditionally, dual variable
    unchanged).  From round 2 on:

        eps_t  = sqrt((ln 2 + 2 ln T) / (2 |I_t|))
        r_est  = mean (v - p_tau)^+ + eps_t v
        c_est  = mean p_tau [v >= p_tau] - 2 eps_t v
        enter  iff r_est >= lambda * c_est
        lambda <- max(lambda + eta_t (x * c_est - rate), 0),  eta_t = 1/(vmax sqrt t)

    The same c_est used in the decision feeds the dual step.  Deterministic
    given the observation sequence.
    """

    name = "ogdcb"

    def __init__(self, horizon: int, budget_rate: float, value_ceiling: float = 1.0):
        if horizon < 2:
            raise ValueError("horizon must be at least 2")
        self.horizon = horizon
        self.budget_rate = budget_rate
        self.value_ceiling = value_ceiling
        self.lam = 0.0
        self.store = SampleStore()
        # (t, eps, r_est, c_est, decision) per consulted round, for diagnostics.
        self.history: list[tuple] = []

    @property
    def dual_value(self) -> float:
        return self.lam

    @property
    def dual_cap(self) -> float:
        return self.value_ceiling / self.budget_rate - 1.0

    def decide(self, t, value, remaining):
        if t == 1:
            self.history.append((1, math.nan, math.nan, math.nan, 1))
            return 1, value
        if self.store.count == 0:
            raise RuntimeError("no observed price before round 2; round 1 must be entered")
        eps = dkw_epsilon(self.store.count, self.horizon)
        r_est = estimate_reward(value, self.store, eps)
        c_est = estimate_cost(value, self.store, eps)
        x = 1 if r_est >= self.lam * c_est else 0
        eta = 1.0 / (self.value_ceiling * math.sqrt(t))
        self.lam = max(self.lam + eta * ((c_est if x else 0.0) - self.budget_rate), 0.0)
        self.history.append((t, eps, r_est, c_est, x))
        return x, (value if x else 0.0)

    def observe(self, t, price, outcome):
        if price is not None:
            self.store.add(price)


class AdaptivePacing(Strategy):
    """Multiplicative bid shading: bid value/(1 + mu) with mu adapted by a
    fixed-step dual update toward the target spend rate.

    mu <- clip(mu - step * (rate - spend), 0, vmax/rate - 1); by default
    step = 1/(vmax sqrt T).  The bid never exceeds the value.  Baseline
    quality: step size and cap are conventional choices, not tuned.
    """

    name = "pacing"

    def __init__(self, horizon: int, budget_rate: float, value_ceiling: float = 1.0,
                 step: float | None = None, mu_cap: float | None = None, mu0: float = 0.0):
        self.horizon = horizon
        self.budget_rate = budget_rate
        self.value_ceiling = value_ceiling
        self.step = step if step is not None else 1.0 / (value_ceiling * math.sqrt(horizon))
        self.mu_cap = mu_cap if mu_cap is not None else value_ceiling / budget_rate - 1.0
        if not 0.0 <= mu0 <= self.mu_cap:
            raise ValueError("mu0 outside [0, mu_cap]")
        self.mu = mu0

    def decide(self, t, value, remaining):
        if remaining < self.value_ceiling:
            return 0, 0.0
        return 1, value / (1.0 + self.mu)

    def observe(self, t, price, outcome):
        if outcome.decision != 1:
            return
        z = outcome.cost
        self.mu = min(max(self.mu - self.step * (self.budget_rate - z), 0.0), self.mu_cap)


class StaticThrottle(Strategy):
    """Enter each round independently with probability pi(value).

    ``participation`` may be a constant in [0, 1] or a callable mapping the
    value to a probability.  Uses the episode's private randomness; subject
    to the usual budget stop.
    """

    name = "static"

    def __init__(self, participation):
        self.participation = participation
        self._rng = None

    def start_episode(self, rng):
        self._rng = rng

    def probability(self, value: float) -> float:
        pi = self.participation(value) if callable(self.participation) else self.participation
        if not 0.0 <= pi <= 1.0:
            raise ValueError(f"participation probability {pi!r} outside [0, 1]")
        return pi

    def decide(self, t, value, remaining):
        x = 1 if self._rng.random() < self.probability(value) else 0
        return x, (value if x else 0.0)


def always_enter() -> StaticThrottle:
    s = StaticThrottle(1.0)
    s.name = "always_enter"
    return s


def always_skip() -> StaticThrottle:
    s = StaticThrottle(0.0)
    s.name = "always_skip"
    return s


def make_strategy(name: str, params: dict | None, *, horizon: int, budget_rate: float,
                  value_ceiling: float = 1.0) -> Strategy:
    """Build a fresh strategy from a name and parameter map (harness entry point)."""
    params = dict(params or {})
    key = name.strip().lower()
    if key == "ogdcb":
        return OgdCb(horizon, budget_rate, value_ceiling)
    if key == "pacing":
        return AdaptivePacing(
            horizon, budget_rate, value_ceiling,
            step=params.get("step"), mu_cap=params.get("mu_cap"),
            mu0=params.get("mu0", 0.0),
        )
    if key == "static":
        if "pi" not in params:
            raise ValueError("static strategy needs a 'pi' parameter")
        return StaticThrottle(float(params["pi"]))
    if key == "always_enter":
        return always_enter()
    if key == "always_skip":
        return always_skip()
    raise ValueError(f"unknown strategy {name!r}")
