"""Auction environments: value/price processes plus horizon and budget, and
the named hard-instance generators used throughout the test harness.

Value sources: a fixed vector, i.i.d. draws from a finite distribution, or a
mixture over fixed vectors (one vector drawn per episode).  Price sources:
i.i.d. draws, a fixed vector, or a reactive rule that prices each round off
the buyer's own participation decision.  Instances serialize to a plain text
format that round-trips exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DiscreteDistribution
from .model import EpisodeConfig, InfoMode


# ---------------------------------------------------------------------------
# Value sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IidValues:
    dist: DiscreteDistribution

    def realize(self, rng, horizon):
        return self.dist.sample(rng, horizon)

    def max_point(self):
        return float(self.dist.points[-1])


@dataclass(frozen=True)
class FixedValues:
    vector: np.ndarray

    def realize(self, rng, horizon):
        if len(self.vector) != horizon:
            raise ValueError("fixed value vector length differs from horizon")
        return self.vector

    def max_point(self):
        return float(np.max(self.vector))


@dataclass(frozen=True)
class MixtureValues:
    """One of several fixed value vectors, drawn per episode with the given
    weights (a vector-valued distribution)."""

    vectors: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.vectors) != w.size or w.size == 0:
            raise ValueError("need one weight per vector")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        lengths = {len(v) for v in self.vectors}
        if len(lengths) != 1:
            raise ValueError("all mixture vectors must share one length")

    def pick_index(self, rng) -> int:
        u = rng.random()
        cum = np.cumsum(np.asarray(self.weights, dtype=float))
        return int(min(np.searchsorted(cum, u, side="right"), len(self.vectors) - 1))

    def realize(self, rng, horizon):
        i = self.pick_index(rng)
        vec = self.vectors[i]
        if len(vec) != horizon:
            raise ValueError("mixture vector length differs from horizon")
        return vec

    def max_point(self):
        return float(max(np.max(v) for v in self.vectors))


# ---------------------------------------------------------------------------
# Price sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IidPrices:
    dist: DiscreteDistribution

    adaptive = False

    def realize(self, rng, horizon):
        return self.dist.sample(rng, horizon)

    def realize_indices(self, rng, horizon):
        return self.dist.sample_index(rng, horizon), self.dist.points

    def max_point(self):
        return float(self.dist.points[-1])


@dataclass(frozen=True)
class FixedPrices:
    vector: np.ndarray

    adaptive = False

    def realize(self, rng, horizon):
        if len(self.vector) != horizon:
            raise ValueError("fixed price vector length differs from horizon")
        return self.vector

    def realize_indices(self, rng, horizon):
        atoms = np.unique(self.vector)
        return np.searchsorted(atoms, self.vector), atoms

    def max_point(self):
        return float(np.max(self.vector))


class _ReactiveOracle:
    __slots__ = ("enter_price", "skip_price")

    def __init__(self, enter_price, skip_price):
        self.enter_price = enter_price
        self.skip_price = skip_price

    def price(self, t, decisions):
        # decisions[t-1] is the buyer's decision for the current round.
        return self.enter_price if decisions[t - 1] else self.skip_price


@dataclass(frozen=True)
class ReactivePrices:
    """Adversarial pricing off the buyer's own decision: a high price on
    entered rounds, a low one on skipped rounds.  Emits exactly two distinct
    prices per run."""

    enter_price: float
    skip_price: float

    adaptive = True

    def make_oracle(self):
        return _ReactiveOracle(self.enter_price, self.skip_price)

    def max_point(self):
        return max(self.enter_price, self.skip_price)


# ---------------------------------------------------------------------------
# Instance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """A complete auction environment."""

    name: str
    horizon: int
    budget_rate: float
    value_ceiling: float
    value_source: object
    price_source: object
    grid: float | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if not 0.0 < self.budget_rate <= self.value_ceiling:
            raise ValueError("need 0 < budget_rate <= value_ceiling")
        if self.value_source.max_point() > self.value_ceiling + 1e-12:
            raise ValueError("value source exceeds the value ceiling")
        if self.price_source.max_point() > self.value_ceiling + 1e-12:
            raise ValueError("price source exceeds the value ceiling")

    @property
    def adaptive_prices(self) -> bool:
        return getattr(self.price_source, "adaptive", False)

    @property
    def budget(self) -> float:
        return self.budget_rate * self.horizon

    def config(self, info_mode=InfoMode.FULL, seed: int = 0) -> EpisodeConfig:
        return EpisodeConfig(self.horizon, self.budget_rate, self.value_ceiling,
                             InfoMode.parse(info_mode), seed)

    def iid_pair(self):
        """(value distribution, price distribution) when both are i.i.d.;
        None otherwise (static benchmarks are undefined then)."""
        if isinstance(self.value_source, IidValues) and isinstance(self.price_source, IidPrices):
            return self.value_source.dist, self.price_source.dist
        return None


# ---------------------------------------------------------------------------
# Named generators
# ---------------------------------------------------------------------------

def two_price_instance(horizon: int) -> Instance:
    """Unit values against prices uniform on {1/3, 2/3}, budget rate 1/2.

    The participation LP is degenerate here (spending rate exactly matches
    the budget rate at full participation), which forces every online policy
    into square-root regret; the exact floor is ``two_price_regret_floor``.
    """
    if horizon % 4 != 0:
        raise ValueError("horizon must be a multiple of 4")
    return Instance(
        name="two_price",
        horizon=horizon,
        budget_rate=0.5,
        value_ceiling=1.0,
        value_source=IidValues(DiscreteDistribution.singleton(1.0, ceiling=1.0)),
        price_source=IidPrices(DiscreteDistribution.uniform([1.0 / 3.0, 2.0 / 3.0], ceiling=1.0)),
        grid=1.0 / 3.0,
    )


def prefix_trap_instance(budget_rate: float, value_ceiling: float, delta: float,
                         horizon: int) -> Instance:
    """Fixed price each round with a mixture of value vectors that share a
    long low-margin prefix and differ only in how soon the margin collapses.

    With m batches of length floor(T/m), vector i keeps the margin ladder
    v_j = p (1 + eps^(m+1-j)) through batch m+1-i and is flat at the price
    afterwards, where p = vmax/(1+eps) and eps = delta/(4-2delta).  Vector
    weights are eps^(m-1), eps^(m-i) - eps^(m-i+1) (i = 2..m-1), 1 - eps.
    Any online policy paces its spend through the worthless prefix, while
    hindsight banks the best surviving batch.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if horizon < value_ceiling / budget_rate:
        raise ValueError("horizon too short for the budget rate")
    m = math.ceil(value_ceiling / budget_rate) + 1
    eps = delta / (4.0 - 2.0 * delta)
    p = value_ceiling / (1.0 + eps)
    batch = horizon // m
    tail = horizon - m * batch
    if p * batch > budget_rate * horizon + 1e-9:
        raise ValueError("batch cost exceeds the total budget; increase the horizon")

    ladder = [p * (1.0 + eps ** (m + 1 - j)) for j in range(1, m + 1)]
    ladder[m - 1] = value_ceiling  # p (1 + eps) == vmax exactly, by choice of p
    vectors = []
    for i in range(1, m + 1):
        keep = m + 1 - i
        parts = [np.full(batch, ladder[j - 1]) for j in range(1, keep + 1)]
        flat = (i - 1) * batch + tail
        if flat:
            parts.append(np.full(flat, p))
        vectors.append(np.concatenate(parts))
    weights = [eps ** (m - 1)]
    weights += [eps ** (m - i) - eps ** (m - i + 1) for i in range(2, m)]
    weights += [1.0 - eps]
    return Instance(
        name="prefix_trap",
        horizon=horizon,
        budget_rate=budget_rate,
        value_ceiling=value_ceiling,
        value_source=MixtureValues(tuple(vectors), np.array(weights)),
        price_source=IidPrices(DiscreteDistribution.singleton(p, ceiling=value_ceiling)),
    )


def reactive_price_instance(mu: float, horizon: int) -> Instance:
    """Fixed value 2/3 with prices chosen against the buyer: 2/3 - eps on
    entered rounds (scraping the margin to eps) and eps on skipped rounds
    (which hindsight later picks up almost for free), eps = mu/(3 mu + 6).

    Witnesses that no bidding strategy survives reactive prices: realized
    revenue minus mu times the hindsight value is negative per round.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    eps = mu / (3.0 * mu + 6.0)
    return Instance(
        name="reactive_price",
        horizon=horizon,
        budget_rate=1.0 / 3.0,
        value_ceiling=1.0,
        value_source=FixedValues(np.full(horizon, 2.0 / 3.0)),
        price_source=ReactivePrices(2.0 / 3.0 - eps, eps),
    )


def pacing_gap_instance(horizon: int) -> Instance:
    """Values uniform {0.4, 1.0}, prices uniform {0.3, 0.9}, budget rate 0.15.

    Spend at full participation (0.375) exceeds the rate, and the
    price-conditional optimum (0.20/round) doubles the participation-only
    optimum (0.10/round): pacing beats any throttling rule by 0.10 per round.
    """
    return Instance(
        name="pacing_gap",
        horizon=horizon,
        budget_rate=0.15,
        value_ceiling=1.0,
        value_source=IidValues(DiscreteDistribution.uniform([0.4, 1.0], ceiling=1.0)),
        price_source=IidPrices(DiscreteDistribution.uniform([0.3, 0.9], ceiling=1.0)),
        grid=0.05,
    )


def singleton_price_instance(horizon: int) -> Instance:
    """Companion to ``pacing_gap_instance`` with a one-point price
    distribution (0.65); the two benchmarks coincide, so pacing and
    throttling should tie to within square-root noise."""
    return Instance(
        name="singleton_price",
        horizon=horizon,
        budget_rate=0.15,
        value_ceiling=1.0,
        value_source=IidValues(DiscreteDistribution.uniform([0.4, 1.0], ceiling=1.0)),
        price_source=IidPrices(DiscreteDistribution.singleton(0.65, ceiling=1.0)),
        grid=0.05,
    )


def random_instance(seed: int, value_support: int = 3, price_support: int = 3,
                    budget_rate: float | None = None, horizon: int = 1000) -> Instance:
    """Random finite-support instance, atoms snapped to multiples of 1/120 so
    the hindsight knapsack stays exactly solvable."""
    if value_support < 1 or price_support < 1:
        raise ValueError("support sizes must be at least 1")
    rng = np.random.default_rng(seed)
    grid = 1.0 / 120.0

    def draw_dist(k):
        pts = np.sort(rng.choice(np.arange(1, 121), size=k, replace=False)) * grid
        w = rng.random(k) + 0.05
        return DiscreteDistribution(pts, w / w.sum(), ceiling=1.0)

    F = draw_dist(value_support)
    G = draw_dist(price_support)
    if budget_rate is None:
        budget_rate = float(rng.uniform(0.05, 0.6))
    return Instance(
        name=f"random_{seed}",
        horizon=horizon,
        budget_rate=budget_rate,
        value_ceiling=1.0,
        value_source=IidValues(F),
        price_source=IidPrices(G),
        grid=grid,
    )


GENERATORS = {
    "two_price": lambda horizon, **kw: two_price_instance(horizon),
    "prefix_trap": lambda horizon, rho=0.5, vmax=1.0, delta=0.5, **kw:
        prefix_trap_instance(rho, vmax, delta, horizon),
    "reactive_price": lambda horizon, mu=1.0, **kw: reactive_price_instance(mu, horizon),
    "pacing_gap": lambda horizon, **kw: pacing_gap_instance(horizon),
    "singleton_price": lambda horizon, **kw: singleton_price_instance(horizon),
    "random": lambda horizon, seed=0, value_support=3, price_support=3, rho=None, **kw:
        random_instance(int(seed), int(value_support), int(price_support), rho, horizon),
}


def build_instance(kind: str, horizon: int, params: dict | None = None) -> Instance:
    params = dict(params or {})
    try:
        gen = GENERATORS[kind.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown instance kind {kind!r}") from None
    return gen(horizon, **params)


# ---------------------------------------------------------------------------
# Text serialization (round-trips exactly via repr floats)
# ---------------------------------------------------------------------------

MAGIC = "throttlebench-instance 1"


def _vector_line(vec) -> str:
    return " ".join(repr(float(x)) for x in vec)


def instance_to_text(inst: Instance) -> str:
    lines = [MAGIC,
             f"name = {inst.name}",
             f"horizon = {inst.horizon}",
             f"rho = {inst.budget_rate!r}",
             f"vmax = {inst.value_ceiling!r}",
             f"grid = {'none' if inst.grid is None else repr(inst.grid)}",
             "[values]"]
    vs = inst.value_source
    if isinstance(vs, IidValues):
        lines.append("kind = iid")
        lines.extend(vs.dist.to_lines())
    elif isinstance(vs, FixedValues):
        lines.append("kind = fixed")
        lines.append(_vector_line(vs.vector))
    elif isinstance(vs, MixtureValues):
        lines.append("kind = mixture")
        for w, vec in zip(vs.weights, vs.vectors):
            lines.append(f"{float(w)!r} {_vector_line(vec)}")
    else:
        raise ValueError(f"cannot serialize value source {vs!r}")
    lines.append("[prices]")
    ps = inst.price_source
    if isinstance(ps, IidPrices):
        lines.append("kind = iid")
        lines.extend(ps.dist.to_lines())
    elif isinstance(ps, FixedPrices):
        lines.append("kind = fixed")
        lines.append(_vector_line(ps.vector))
    elif isinstance(ps, ReactivePrices):
        lines.append("kind = reactive")
        lines.append(f"enter_price = {ps.enter_price!r}")
        lines.append(f"skip_price = {ps.skip_price!r}")
    else:
        raise ValueError(f"cannot serialize price source {ps!r}")
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> Instance:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MAGIC:
        raise ValueError("not an instance file (bad header)")
    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i] != "[values]":
        key, _, val = lines[i].partition("=")
        header[key.strip()] = val.strip()
        i += 1
    if i == len(lines):
        raise ValueError("missing [values] section")
    i += 1
    vlines = []
    while i < len(lines) and lines[i] != "[prices]":
        vlines.append(lines[i])
        i += 1
    if i == len(lines):
        raise ValueError("missing [prices] section")
    plines = lines[i + 1:]

    horizon = int(header["horizon"])
    vmax = float(header["vmax"])
    grid_text = header.get("grid", "none")
    grid = None if grid_text == "none" else float(grid_text)

    def parse_values(block):
        kind = block[0].partition("=")[2].strip()
        body = block[1:]
        if kind == "iid":
            return IidValues(DiscreteDistribution.from_lines(body, ceiling=vmax))
        if kind == "fixed":
            return FixedValues(np.array([float(x) for x in body[0].split()]))
        if kind == "mixture":
            weights, vectors = [], []
            for ln in body:
                parts = ln.split()
                weights.append(float(parts[0]))
                vectors.append(np.array([float(x) for x in parts[1:]]))
            return MixtureValues(tuple(vectors), np.array(weights))
        raise ValueError(f"unknown value kind {kind!r}")

    def parse_prices(block):
        kind = block[0].partition("=")[2].strip()
        body = block[1:]
        if kind == "iid":
            return IidPrices(DiscreteDistribution.from_lines(body, ceiling=vmax))
        if kind == "fixed":
            return FixedPrices(np.array([float(x) for x in body[0].split()]))
        if kind == "reactive":
            kv = dict(ln.partition("=")[::2] for ln in body)
            kv = {k.strip(): v.strip() for k, v in kv.items()}
            return ReactivePrices(float(kv["enter_price"]), float(kv["skip_price"]))
        raise ValueError(f"unknown price kind {kind!r}")

    return Instance(
        name=header.get("name", "instance"),
        horizon=horizon,
        budget_rate=float(header["rho"]),
        value_ceiling=vmax,
        value_source=parse_values(vlines),
        price_source=parse_prices(plines),
        grid=grid,
    )
