"""Exact benchmark values for budget-constrained bidding.

Three benchmarks:

* ``fluid_opt`` — best per-round value of a randomized participation rule
  pi(value) with the spend constraint met in expectation.  A one-constraint
  LP whose optimum is a fractional knapsack over the value atoms.
* ``dlp_opt`` — same, but the rule kappa(value, price) may condition on the
  price; fractional knapsack over the (value, price) product atoms.
* ``hindsight_opt`` — best 0/1 selection of rounds for one realized
  trajectory under the hard budget.

Plus the closed forms for the two-price hard instance: an exact revenue cap
given the count of low prices, and an exact expected-regret floor (exact
big-integer series with its concise closed form).

Rational arithmetic appears only here, where correctness is binary;
simulation code stays in floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .distributions import DiscreteDistribution, interim_curves

SPEND_TOL = 1e-12
GRID_TOL = 1e-9
DEFAULT_CELL_CAP = 50_000_000


# ---------------------------------------------------------------------------
# Fluid benchmark (participation may depend on the value only)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FluidSolution:
    per_round_value: float
    policy: dict          # value point -> participation probability
    threshold_ratio: float  # reward/cost ratio at the marginal atom (0 if slack)
    binding: bool
    expected_spend: float

    def policy_function(self):
        """The policy as a callable on value points (exact-point lookup)."""
        table = self.policy

        def pi(v: float) -> float:
            try:
                return table[v]
            except KeyError:
                raise KeyError(f"value {v!r} not a support point of the solved instance")

        return pi


def fluid_opt(F: DiscreteDistribution, G: DiscreteDistribution, rho: float) -> FluidSolution:
    """Solve the participation LP by fractional knapsack over the value atoms.

    Atoms with zero expected spend are taken first (free); the rest are
    filled in decreasing reward/spend ratio until the budget rate is
    exhausted, with at most one fractional atom.  Ties break toward the
    larger reward, then the lower atom index.
    """
    curves = interim_curves(G)
    r = np.array([curves.reward(float(v)) for v in F.points])
    c = np.array([curves.cost(float(v)) for v in F.points])
    mass = F.weights
    k = len(F)

    pi = np.zeros(k)
    value = 0.0
    spend = 0.0
    free = c <= 0.0
    pi[free] = 1.0
    value += float(np.dot(mass[free], r[free]))

    costly = [i for i in range(k) if not free[i]]
    costly.sort(key=lambda i: (-(r[i] / c[i]), -r[i], i))
    total_spend_at_one = float(sum(mass[i] * c[i] for i in costly))
    binding = total_spend_at_one >= rho - SPEND_TOL

    remaining = rho
    threshold = 0.0
    for i in costly:
        step = mass[i] * c[i]
        if step <= remaining + SPEND_TOL:
            pi[i] = 1.0
            remaining -= step
            value += mass[i] * r[i]
            spend += step
            if binding:
                threshold = r[i] / c[i]
        elif remaining > SPEND_TOL:
            frac = remaining / step
            pi[i] = frac
            value += frac * mass[i] * r[i]
            spend += remaining
            remaining = 0.0
            threshold = r[i] / c[i]
        else:
            break

    expected_spend = float(np.dot(mass, c * pi))
    if expected_spend > rho + 1e-9:
        raise AssertionError("fluid solution overspends")
    policy = {float(v): float(p) for v, p in zip(F.points, pi)}
    return FluidSolution(float(value), policy, float(threshold), bool(binding), expected_spend)


# ---------------------------------------------------------------------------
# Price-conditional benchmark (deterministic LP)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DlpSolution:
    per_round_value: float
    shading_threshold: float   # accept iff value > (1 + threshold) * price
    fractional_pair: tuple | None
    binding: bool
    expected_spend: float


def dlp_opt(F: DiscreteDistribution, G: DiscreteDistribution, rho: float) -> DlpSolution:
    """Fractional knapsack over the (value, price) product atoms.

    Reward (v - p)^+ and weight p * [v >= p] per atom; zero-weight
    positive-reward atoms are free; zero-reward atoms are never taken.  The
    accept region of the optimum is v > (1 + threshold) * p, where the
    threshold is the reward/weight ratio at the marginal atom.
    """
    atoms = []  # (i, j, mass, u, w)
    for i, (v, fv) in enumerate(zip(F.points, F.weights)):
        for j, (p, gw) in enumerate(zip(G.points, G.weights)):
            m = float(fv * gw)
            u = max(float(v) - float(p), 0.0)
            w = float(p) if v >= p else 0.0
            atoms.append((i, j, m, u, w))

    value = 0.0
    spend = 0.0
    kappa = {}
    useful = []
    for (i, j, m, u, w) in atoms:
        if u <= 0.0:
            kappa[(i, j)] = 0.0
        elif w <= 0.0:
            kappa[(i, j)] = 1.0
            value += m * u
        else:
            useful.append((i, j, m, u, w))

    useful.sort(key=lambda a: (-(a[3] / a[4]), -a[3], a[0], a[1]))
    total_spend_at_one = sum(m * w for (_, _, m, _, w) in useful)
    binding = total_spend_at_one >= rho - SPEND_TOL

    remaining = rho
    threshold = 0.0
    fractional_pair = None
    for (i, j, m, u, w) in useful:
        step = m * w
        if step <= remaining + SPEND_TOL:
            kappa[(i, j)] = 1.0
            remaining -= step
            value += m * u
            spend += step
            if binding:
                threshold = u / w
        elif remaining > SPEND_TOL:
            frac = remaining / step
            kappa[(i, j)] = frac
            value += frac * m * u
            spend += remaining
            remaining = 0.0
            threshold = u / w
            fractional_pair = (float(F.points[i]), float(G.points[j]))
        else:
            kappa[(i, j)] = 0.0

    if spend > rho + 1e-9:
        raise AssertionError("price-conditional solution overspends")
    return DlpSolution(float(value), float(threshold), fractional_pair, bool(binding), float(spend))


def lp_max_by_vertex_enumeration(rewards, weights, budget) -> float:
    """Exact optimum of max a.x s.t. w.x <= budget, 0 <= x <= 1, found by
    exhaustively enumerating every vertex of the feasible box-with-one-cut.

    Vertices are the feasible 0/1 points plus, for each 0/1 point and each
    remaining coordinate, the completion that spends the leftover budget on
    that coordinate.  Independent reference path for the greedy solvers;
    practical up to ~16 coordinates.
    """
    a = np.asarray(rewards, dtype=float)
    w = np.asarray(weights, dtype=float)
    n = a.size
    if n > 20:
        raise ValueError("vertex enumeration capped at 20 coordinates")
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    spends = bits @ w
    values = bits @ a
    feasible = spends <= budget + SPEND_TOL
    best = float(values[feasible].max()) if feasible.any() else 0.0
    for j in range(n):
        if w[j] <= 0.0:
            continue  # zero-weight coordinates are covered by the 0/1 points
        open_j = feasible & (bits[:, j] == 0)
        if not open_j.any():
            continue
        frac = np.clip((budget - spends[open_j]) / w[j], 0.0, 1.0)
        cand = values[open_j] + frac * a[j]
        best = max(best, float(cand.max()))
    return best


# ---------------------------------------------------------------------------
# Hindsight benchmark (hard budget, one realized trajectory)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HindsightResult:
    value: float
    selection: np.ndarray
    exact: bool
    upper: float  # equals value when exact; LP-relaxation bound otherwise


def hindsight_opt(values, prices, budget, grid=None,
                  cell_cap: int = DEFAULT_CELL_CAP) -> HindsightResult:
    """Best 0/1 selection of rounds: max sum of (v - p)^+ over selected
    rounds subject to sum of winning payments <= budget.

    When rewards and costs all sit on the money ``grid`` the whole
    computation runs in integer grid units (so the result is exact to the
    last bit and matches exhaustive enumeration).  Exact paths, tried in
    order: everything fits; a single distinct positive cost (take the top
    rewards); at most two distinct (reward, cost) classes (1-D count
    enumeration); knapsack DP with a table of at most ``cell_cap`` cells.
    Otherwise the greedy selection is returned as a certified lower bound
    with the fractional-relaxation upper bound (gap at most one round's
    reward).
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    v = np.asarray(values, dtype=float)
    p = np.asarray(prices, dtype=float)
    if v.shape != p.shape or v.ndim != 1:
        raise ValueError("values and prices must be 1-d arrays of equal length")
    n = v.size
    rewards = np.maximum(v - p, 0.0)
    costs = np.where(v >= p, p, 0.0)

    if grid is not None and grid > 0:
        ir = np.rint(rewards / grid).astype(np.int64)
        ic = np.rint(costs / grid).astype(np.int64)
        if (np.all(np.abs(ir * grid - rewards) <= GRID_TOL)
                and np.all(np.abs(ic * grid - costs) <= GRID_TOL)):
            W = int(np.floor(budget / grid + GRID_TOL))
            return _hindsight_units(n, ir, ic, W, grid, cell_cap)

    selection = np.zeros(n, dtype=np.int8)
    base = 0.0
    free = (costs <= 0.0) & (rewards > 0.0)
    selection[free] = 1
    base += float(rewards[free].sum())

    cand = np.flatnonzero((costs > 0.0) & (rewards > 0.0))
    if cand.size == 0:
        return HindsightResult(base, selection, True, base)

    cr = rewards[cand]
    cc = costs[cand]
    if float(cc.sum()) <= budget + GRID_TOL:
        selection[cand] = 1
        total = base + float(cr.sum())
        return HindsightResult(total, selection, True, total)

    distinct_costs = np.unique(cc)
    if distinct_costs.size == 1:
        w = float(distinct_costs[0])
        kmax = int(np.floor(budget / w + GRID_TOL))
        order = np.lexsort((cand, -cr))  # reward desc, index asc
        chosen = cand[order[:kmax]]
        selection[chosen] = 1
        total = base + float(cr[order[:kmax]].sum())
        return HindsightResult(total, selection, True, total)

    two_class = _two_class_best(cand, cr, cc, budget)
    if two_class is not None:
        best_val, chosen = two_class
        selection[chosen] = 1
        total = base + best_val
        return HindsightResult(total, selection, True, total)

    return _greedy_bracket(base, selection, cand, cr, cc, budget)


def _two_class_best(cand, cr, cc, budget, tol=GRID_TOL):
    """Exact optimum when the costly items form at most two identical
    classes; returns (value, chosen indices) or None."""
    classes = {}
    for idx, u, w in zip(cand, cr, cc):
        classes.setdefault((float(u), float(w)), []).append(int(idx))
    if len(classes) > 2:
        return None
    if len(classes) == 1:
        (u1, w1), idx1 = next(iter(classes.items()))
        a = min(len(idx1), max(0, int(np.floor(budget / w1 + tol))))
        return a * u1, idx1[:a]
    (u1, w1), idx1 = list(classes.items())[0]
    (u2, w2), idx2 = list(classes.items())[1]
    if len(idx1) > len(idx2):
        (u1, w1, idx1), (u2, w2, idx2) = (u2, w2, idx2), (u1, w1, idx1)
    best_val, best_ab = -1.0, (0, 0)
    for a in range(len(idx1) + 1):
        rem = budget - a * w1
        if rem < -tol:
            break
        b = max(0, min(len(idx2), int(np.floor(rem / w2 + tol))))
        val = a * u1 + b * u2
        if val > best_val:
            best_val, best_ab = val, (a, b)
    a, b = best_ab
    return best_val, idx1[:a] + idx2[:b]


def _hindsight_units(n, int_rewards, int_costs, W, grid, cell_cap):
    """Exact hindsight optimum in integer grid units."""
    selection = np.zeros(n, dtype=np.int8)
    base = 0
    free = (int_costs <= 0) & (int_rewards > 0)
    selection[free] = 1
    base += int(int_rewards[free].sum())

    cand = np.flatnonzero((int_costs > 0) & (int_rewards > 0))

    def done(units):
        total = float(units) * grid
        return HindsightResult(total, selection, True, total)

    if cand.size == 0:
        return done(base)
    cr = int_rewards[cand]
    cc = int_costs[cand]
    if int(cc.sum()) <= W:
        selection[cand] = 1
        return done(base + int(cr.sum()))

    if np.unique(cc).size == 1:
        w = int(cc[0])
        kmax = W // w
        order = np.lexsort((cand, -cr))
        chosen = cand[order[:kmax]]
        selection[chosen] = 1
        return done(base + int(cr[order[:kmax]].sum()))

    two_class = _two_class_best(cand, cr, cc, W, tol=0)
    if two_class is not None:
        best_val, chosen = two_class
        selection[chosen] = 1
        return done(base + int(best_val))

    if cand.size * (W + 1) <= cell_cap:
        dp = np.zeros(W + 1, dtype=np.int64)
        take = np.zeros((cand.size, W + 1), dtype=bool)
        for k in range(cand.size):
            ck = int(cc[k])
            if ck > W:
                continue
            shifted = dp[: W + 1 - ck] + cr[k]
            better = shifted > dp[ck:]
            take[k, ck:] = better
            dp[ck:] = np.where(better, shifted, dp[ck:])
        w = W
        for k in range(cand.size - 1, -1, -1):
            if take[k, w]:
                selection[cand[k]] = 1
                w -= int(cc[k])
        return done(base + int(dp[W]))

    return _greedy_bracket(float(base) * grid, selection, cand,
                           cr.astype(float) * grid, cc.astype(float) * grid,
                           float(W) * grid)


def _greedy_bracket(base, selection, cand, cr, cc, budget):
    order = np.lexsort((cand, -cr, -(cr / cc)))  # ratio desc, reward desc, index asc
    remaining = budget
    lower = 0.0
    upper = None
    prefix_value = 0.0
    prefix_spend = 0.0
    for pos in order:
        w = float(cc[pos])
        u = float(cr[pos])
        if upper is None:
            if prefix_spend + w <= budget + GRID_TOL:
                prefix_value += u
                prefix_spend += w
            else:
                upper = prefix_value + (budget - prefix_spend) / w * u
        if w <= remaining + GRID_TOL:
            selection[cand[pos]] = 1
            lower += u
            remaining -= w
    if upper is None:
        upper = prefix_value
    return HindsightResult(base + lower, selection, False, base + upper)


def hindsight_by_enumeration(values, prices, budget, grid) -> float:
    """Reference optimum by exhaustive subset enumeration on grid-aligned
    money (exact integer arithmetic).  Exponential; horizons up to ~20."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(prices, dtype=float)
    n = v.size
    if n > 20:
        raise ValueError("enumeration capped at 20 rounds")
    rewards = np.maximum(v - p, 0.0)
    costs = np.where(v >= p, p, 0.0)
    int_costs = np.rint(costs / grid).astype(np.int64)
    int_rewards = np.rint(rewards / grid).astype(np.int64)
    if not (np.all(np.abs(int_costs * grid - costs) <= GRID_TOL)
            and np.all(np.abs(int_rewards * grid - rewards) <= GRID_TOL)):
        raise ValueError("inputs are not aligned to the given grid")
    W = int(np.floor(budget / grid + GRID_TOL))
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    total_cost = bits @ int_costs
    total_reward = bits @ int_rewards
    feasible = total_cost <= W
    return float(total_reward[feasible].max()) * grid


# ---------------------------------------------------------------------------
# Two-price hard instance: exact revenue cap and regret floor
# ---------------------------------------------------------------------------

def two_price_revenue_cap(low_count: int, horizon: int) -> Fraction:
    """Largest budget-feasible revenue on the two-price instance (unit values,
    prices 1/3 and 2/3, budget rate 1/2) when the realized price vector has
    ``low_count`` low prices.  Exact rational."""
    S, T = low_count, horizon
    if T % 4 != 0:
        raise ValueError("horizon must be a multiple of 4")
    if not 0 <= S <= T:
        raise ValueError("low_count must lie in [0, horizon]")
    if 2 * S >= T:
        return Fraction(S + T, 3)
    return Fraction(2 * S + (3 * T - 2 * S) // 4, 3)


@dataclass(frozen=True)
class TwoPriceRegretFloor:
    """Exact expected-regret floor for the two-price instance.

    ``series`` is the big-integer sum  sum_{t=1}^{T/4} (T - 4(t-1)) C(T+1, 2t-1);
    ``closed_form`` is 2^(T-1) + (T/2) C(T, T/2); the two are equal, and the
    floor is their common value divided by 12 * 2^T.
    """

    horizon: int
    series: int
    closed_form: int

    @property
    def bound(self) -> Fraction:
        return Fraction(self.series, 12 * 2 ** self.horizon)


def two_price_regret_floor(horizon: int) -> TwoPriceRegretFloor:
    T = horizon
    if T % 4 != 0 or T < 4:
        raise ValueError("horizon must be a positive multiple of 4")
    series = sum((T - 4 * (t - 1)) * comb(T + 1, 2 * t - 1) for t in range(1, T // 4 + 1))
    closed = 2 ** (T - 1) + (T // 2) * comb(T, T // 2)
    return TwoPriceRegretFloor(T, series, closed)


def regret(trajectory, opt_per_round: float) -> float:
    """Shortfall of a trajectory's total reward against T times the fluid
    per-round value."""
    return trajectory.horizon * opt_per_round - trajectory.total_reward
