"""Round mechanics and the episode loop for repeated second-price auctions.

One buyer with total budget ``B = budget_rate * horizon`` faces a sequence of
(value, highest competing bid) pairs.  Each round she either enters (bidding
truthfully under throttling, or a shaded amount under pacing) or stays out.
Winning pays the competing bid and earns ``value - price``.  Once the
remaining budget drops below the value ceiling the buyer is shut out for the
rest of the episode; those trailing rounds stay in the trajectory with a
forced zero decision so that every trajectory has the full horizon length.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class InfoMode(enum.Enum):
    """Whether the competing bid is revealed every round or only on entry."""

    FULL = "full"
    PARTIAL = "partial"

    @classmethod
    def parse(cls, text) -> "InfoMode":
        if isinstance(text, InfoMode):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown info mode {text!r}; expected 'full' or 'partial'")


@dataclass(frozen=True)
class RoundOutcome:
    """Settled result of one auction round.

    For a truthful (throttling) entry the fields satisfy
        reward = decision * max(value - price, 0)
        cost   = decision * price * [value >= price]
        reward + cost = decision * value * [value >= price]
    """

    value: float
    price: float
    decision: int
    reward: float
    cost: float


def _settle(value: float, price: float, decision: int, bid: float) -> RoundOutcome:
    # Caller guarantees bid <= value, so reward is never negative on a win.
    if decision and bid >= price:
        return RoundOutcome(value, price, 1, value - price, price)
    return RoundOutcome(value, price, int(decision), 0.0, 0.0)


def settle_round(value: float, price: float, decision: int, ceiling: float = 1.0) -> RoundOutcome:
    """Settle one truthful-entry round (the bid equals the value).

    Ties value == price count as a win at payment price.
    """
    if not 0.0 <= value <= ceiling:
        raise ValueError(f"value {value!r} outside [0, {ceiling!r}]")
    if not 0.0 <= price <= ceiling:
        raise ValueError(f"price {price!r} outside [0, {ceiling!r}]")
    if decision not in (0, 1):
        raise ValueError(f"decision must be 0 or 1, got {decision!r}")
    return _settle(value, price, decision, value)


@dataclass(frozen=True)
class EpisodeConfig:
    """Episode parameters: horizon T, per-round budget rate, value ceiling,
    feedback mode and the episode seed."""

    horizon: int
    budget_rate: float
    value_ceiling: float = 1.0
    info_mode: InfoMode = InfoMode.FULL
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not 0.0 < self.budget_rate <= self.value_ceiling:
            raise ValueError("need 0 < budget_rate <= value_ceiling")
        if self.budget_rate * self.horizon < self.value_ceiling:
            raise ValueError("total budget must be at least the value ceiling")

    @property
    def budget(self) -> float:
        return self.budget_rate * self.horizon


@dataclass
class Trajectory:
    """Per-round record of one episode.

    ``stop_round`` is the last round with decision 1 (0 if the buyer never
    entered).  ``dual_path`` holds the dual variable seen at each consulted
    round plus its final post-update value; it is empty for strategies
    without a dual variable.
    """

    rounds: list[RoundOutcome]
    stop_round: int
    total_reward: float
    total_cost: float
    dual_path: list[float] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.rounds)

    def decisions(self) -> np.ndarray:
        return np.array([r.decision for r in self.rounds], dtype=np.int8)

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.rounds])

    def prices(self) -> np.ndarray:
        return np.array([r.price for r in self.rounds])

    def rewards(self) -> np.ndarray:
        return np.array([r.reward for r in self.rounds])

    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.rounds])


def run_episode(strategy, instance, config: EpisodeConfig) -> Trajectory:
    """Run one episode of ``strategy`` on ``instance`` under ``config``.

    The budget check runs after each round's deduction: once the remaining
    budget is below the value ceiling the strategy is never consulted again
    and later rounds carry a forced zero decision.  Under partial feedback
    the strategy's observe hook receives the price only on entered rounds;
    under full feedback it receives the price every round.
    """
    if instance.horizon != config.horizon:
        raise ValueError(f"instance horizon {instance.horizon} != config horizon {config.horizon}")
    if instance.value_ceiling != config.value_ceiling or instance.budget_rate != config.budget_rate:
        raise ValueError("instance and config disagree on budget_rate or value_ceiling")

    ss = np.random.SeedSequence(config.seed)
    value_ss, price_ss, gamma_ss = ss.spawn(3)
    values = instance.value_source.realize(np.random.default_rng(value_ss), config.horizon)
    if instance.adaptive_prices:
        prices = None
        oracle = instance.price_source.make_oracle()
    else:
        prices = instance.price_source.realize(np.random.default_rng(price_ss), config.horizon)
        oracle = None
    strategy.start_episode(np.random.default_rng(gamma_ss))

    full = config.info_mode is InfoMode.FULL
    ceiling = config.value_ceiling
    remaining = config.budget
    alive = True
    decisions: list[int] = []
    rounds: list[RoundOutcome] = []
    dual: list[float] = []
    has_dual = getattr(strategy, "dual_value", None) is not None
    total_reward = 0.0
    total_cost = 0.0
    stop_round = 0

    for t in range(1, config.horizon + 1):
        v = float(values[t - 1])
        if alive:
            if has_dual:
                dual.append(strategy.dual_value)
            x, bid = strategy.decide(t, v, remaining)
        else:
            x, bid = 0, 0.0
        decisions.append(x)
        p = float(prices[t - 1]) if prices is not None else float(oracle.price(t, decisions))
        if not 0.0 <= v <= ceiling or not 0.0 <= p <= ceiling:
            raise ValueError(f"round {t}: value/price outside [0, {ceiling}]")
        out = _settle(v, p, x, bid)
        rounds.append(out)
        remaining -= out.cost
        total_reward += out.reward
        total_cost += out.cost
        if x:
            stop_round = t
        if full or x == 1:
            strategy.observe(t, p, out)
        else:
            strategy.observe(t, None, out)
        if alive and remaining < ceiling:
            alive = False

    if has_dual:
        dual.append(strategy.dual_value)
    return Trajectory(rounds, stop_round, total_reward, total_cost, dual)
