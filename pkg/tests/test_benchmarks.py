"""Exact benchmark solvers against independent reference computations."""

from fractions import Fraction

import numpy as np
import pytest

from throttlebench.benchmarks import (
    dlp_opt,
    fluid_opt,
    hindsight_by_enumeration,
    hindsight_opt,
    lp_max_by_vertex_enumeration,
    regret,
    two_price_regret_floor,
    two_price_revenue_cap,
)
from throttlebench.distributions import DiscreteDistribution, interim_curves
from throttlebench.instances import pacing_gap_instance, random_instance, two_price_instance
from throttlebench.model import Trajectory, run_episode
from throttlebench.strategies import always_skip


def fluid_reference(F, G, rho):
    curves = interim_curves(G)
    rewards = np.array([fv * curves.reward(float(v)) for v, fv in zip(F.points, F.weights)])
    weights = np.array([fv * curves.cost(float(v)) for v, fv in zip(F.points, F.weights)])
    return lp_max_by_vertex_enumeration(rewards, weights, rho)


def dlp_reference(F, G, rho):
    rewards, weights = [], []
    for v, fv in zip(F.points, F.weights):
        for p, gw in zip(G.points, G.weights):
            rewards.append(fv * gw * max(float(v) - float(p), 0.0))
            weights.append(fv * gw * (float(p) if v >= p else 0.0))
    return lp_max_by_vertex_enumeration(np.array(rewards), np.array(weights), rho)


# --- fluid ------------------------------------------------------------------

def test_fluid_on_two_price_instance():
    F, G = two_price_instance(8).iid_pair()
    sol = fluid_opt(F, G, 0.5)
    assert sol.per_round_value == pytest.approx(0.5, abs=1e-12)
    assert sol.policy == {1.0: 1.0}
    assert sol.binding
    assert sol.expected_spend == pytest.approx(0.5, abs=1e-12)


def test_fluid_with_slack_budget_is_full_participation():
    F = DiscreteDistribution.uniform([0.4, 1.0], ceiling=1.0)
    G = DiscreteDistribution.uniform([0.3, 0.9], ceiling=1.0)
    sol = fluid_opt(F, G, 0.5)  # spend at full participation is 0.375 < 0.5
    assert sol.policy == {0.4: 1.0, 1.0: 1.0}
    assert not sol.binding
    curves = interim_curves(G)
    expect = 0.5 * curves.reward(0.4) + 0.5 * curves.reward(1.0)
    assert sol.per_round_value == pytest.approx(expect, abs=1e-12)


def test_fluid_on_gap_instance():
    F, G = pacing_gap_instance(8).iid_pair()
    sol = fluid_opt(F, G, 0.15)
    assert sol.per_round_value == pytest.approx(0.10, abs=1e-12)
    assert sol.policy[0.4] == 0.0
    assert sol.policy[1.0] == pytest.approx(0.5, abs=1e-12)
    assert sol.binding
    assert sol.per_round_value == pytest.approx(fluid_reference(F, G, 0.15), abs=1e-9)


def test_fluid_threshold_splits_accepts_from_rejects():
    rng = np.random.default_rng(12)
    for seed in range(10):
        inst = random_instance(seed, 4, 4, None, 16)
        F, G = inst.iid_pair()
        sol = fluid_opt(F, G, inst.budget_rate)
        curves = interim_curves(G)
        if not sol.binding:
            continue
        for v, pi in sol.policy.items():
            c = curves.cost(v)
            if c <= 0:
                continue
            ratio = curves.reward(v) / c
            if pi == 1.0:
                assert ratio >= sol.threshold_ratio - 1e-9
            elif pi == 0.0:
                assert ratio <= sol.threshold_ratio + 1e-9


# --- price-conditional ------------------------------------------------------

def test_dlp_with_slack_budget_equals_fluid():
    F = DiscreteDistribution.uniform([0.4, 1.0], ceiling=1.0)
    G = DiscreteDistribution.uniform([0.3, 0.9], ceiling=1.0)
    d = dlp_opt(F, G, 0.5)
    f = fluid_opt(F, G, 0.5)
    assert d.per_round_value == pytest.approx(f.per_round_value, abs=1e-12)
    assert not d.binding


def test_dlp_with_singleton_prices_equals_fluid():
    F = DiscreteDistribution.uniform([0.4, 1.0], ceiling=1.0)
    G = DiscreteDistribution.singleton(0.65, ceiling=1.0)
    assert dlp_opt(F, G, 0.15).per_round_value == pytest.approx(
        fluid_opt(F, G, 0.15).per_round_value, abs=1e-12)


def test_dlp_on_gap_instance():
    F, G = pacing_gap_instance(8).iid_pair()
    sol = dlp_opt(F, G, 0.15)
    assert sol.per_round_value == pytest.approx(0.20, abs=1e-12)
    assert sol.expected_spend == pytest.approx(0.15, abs=1e-12)
    # accepted pairs have value/price above 4/3, the rejected one sits at 10/9
    assert 1 / 9 < sol.shading_threshold <= 1 / 3 + 1e-12
    assert sol.per_round_value == pytest.approx(dlp_reference(F, G, 0.15), abs=1e-9)


def test_dlp_dominates_fluid_on_random_instances():
    for seed in range(25):
        inst = random_instance(seed, 4, 4, None, 16)
        F, G = inst.iid_pair()
        f = fluid_opt(F, G, inst.budget_rate).per_round_value
        d = dlp_opt(F, G, inst.budget_rate).per_round_value
        assert d >= f - 1e-12
        assert f == pytest.approx(fluid_reference(F, G, inst.budget_rate), abs=1e-9)
        assert d == pytest.approx(dlp_reference(F, G, inst.budget_rate), abs=1e-9)


# --- hindsight --------------------------------------------------------------

def test_hindsight_two_round_example():
    res = hindsight_opt([1.0, 1.0], [1 / 3, 2 / 3], 1.0, grid=1 / 3)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert list(res.selection) == [1, 1]
    assert res.exact


def test_hindsight_all_losing_rounds():
    res = hindsight_opt([0.1, 0.2, 0.3], [0.5, 0.6, 0.9], 10.0, grid=None)
    assert res.value == 0.0 and res.exact


def test_hindsight_unconstrained_budget():
    v = np.array([0.5, 0.9, 0.3])
    p = np.array([0.2, 0.4, 0.35])
    res = hindsight_opt(v, p, 10.0, grid=None)
    assert res.value == pytest.approx(float(np.maximum(v - p, 0.0).sum()))
    assert res.exact


def test_hindsight_rejects_negative_budget():
    with pytest.raises(ValueError):
        hindsight_opt([1.0], [0.5], -1.0)


def test_hindsight_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(21)
    for trial in range(30):
        inst = random_instance(trial, 4, 4, None, 14)
        F, G = inst.iid_pair()
        v = F.sample(rng, 14)
        p = G.sample(rng, 14)
        budget = inst.budget_rate * 14
        got = hindsight_opt(v, p, budget, grid=inst.grid)
        assert got.exact
        assert got.value == hindsight_by_enumeration(v, p, budget, inst.grid)


def test_hindsight_two_class_path_is_exact():
    # two identical classes: rewards {0.2, 0.05}, costs {0.5, 0.25}
    v = np.array([0.7] * 4 + [0.3] * 6)
    p = np.array([0.5] * 4 + [0.25] * 6)
    res = hindsight_opt(v, p, 1.3, grid=None)
    ref = hindsight_by_enumeration(v, p, 1.3, 1 / 20)
    assert res.exact and res.value == pytest.approx(ref, abs=1e-12)


def test_hindsight_bracket_path_bounds():
    rng = np.random.default_rng(33)
    v = rng.uniform(0.3, 1.0, 40)
    p = rng.uniform(0.0, 1.0, 40) * v  # everything wins, irrational-ish costs
    budget = 0.25 * float(p.sum())
    res = hindsight_opt(v, p, budget, grid=None)
    assert not res.exact
    assert res.value <= res.upper <= res.value + 1.0 + 1e-9
    chosen = res.selection.astype(bool)
    assert float(p[chosen].sum()) <= budget + 1e-9
    assert res.value == pytest.approx(float((v - p)[chosen].sum()), abs=1e-9)


def test_hindsight_selection_within_budget_and_consistent():
    rng = np.random.default_rng(8)
    for trial in range(10):
        inst = random_instance(trial + 40, 3, 3, None, 16)
        F, G = inst.iid_pair()
        v = F.sample(rng, 16)
        p = G.sample(rng, 16)
        res = hindsight_opt(v, p, inst.budget_rate * 16, grid=inst.grid)
        chosen = res.selection.astype(bool)
        cost = np.where(v >= p, p, 0.0)
        assert float(cost[chosen].sum()) <= inst.budget_rate * 16 + 1e-9
        assert res.value == pytest.approx(float(np.maximum(v - p, 0.0)[chosen].sum()), abs=1e-9)


# --- two-price closed forms --------------------------------------------------

def test_revenue_cap_examples():
    assert two_price_revenue_cap(3, 4) == Fraction(7, 3)
    assert two_price_revenue_cap(1, 4) == Fraction(4, 3)
    assert two_price_revenue_cap(2, 4) == Fraction(2)  # boundary uses the first branch
    with pytest.raises(ValueError):
        two_price_revenue_cap(0, 6)
    with pytest.raises(ValueError):
        two_price_revenue_cap(5, 4)


def test_revenue_cap_dominates_exhaustive_search_small():
    for T in (4, 8):
        budget_units = 3 * T // 2
        pop = np.array([bin(x).count("1") for x in range(1 << T)], dtype=np.int64)
        all_x = np.arange(1 << T, dtype=np.int64)
        for pmask in range(1 << T):
            low = pop[all_x & pmask]
            high = pop[all_x] - low
            feasible = low + 2 * high <= budget_units
            best = int((2 * low + high)[feasible].max())
            assert best <= 3 * two_price_revenue_cap(int(pop[pmask]), T)


def test_regret_floor_small_horizons():
    f4 = two_price_regret_floor(4)
    assert (f4.series, f4.closed_form) == (20, 20)
    assert f4.bound == Fraction(5, 48)
    f8 = two_price_regret_floor(8)
    assert (f8.series, f8.closed_form) == (408, 408)
    with pytest.raises(ValueError):
        two_price_regret_floor(6)


def test_regret_floor_identity_holds_exactly():
    for T in (4, 8, 16, 32, 64, 128):
        floor = two_price_regret_floor(T)
        assert floor.series == floor.closed_form


def test_regret_of_trajectory():
    inst = two_price_instance(16)
    traj = run_episode(always_skip(), inst, inst.config("full", 0))
    assert regret(traj, 0.5) == pytest.approx(8.0)  # zero reward: regret is T * (OPT/T)
    matched = Trajectory(traj.rounds, 0, 8.0, 0.0)  # reward equal to T * (OPT/T)
    assert regret(matched, 0.5) == 0.0


def test_hindsight_sample_mean_brackets_dlp():
    # on the binding gap instance the hindsight mean sits at most a
    # square-root term below T times the price-conditional optimum and never
    # meaningfully above it (the upper side gets a CI allowance because the
    # sample mean of 10^3 draws fluctuates around the true expectation)
    F, G = pacing_gap_instance(16).iid_pair()
    dlp = dlp_opt(F, G, 0.15).per_round_value
    rng = np.random.default_rng(17)

    def sample_hindsight(T, n=1000):
        vals = np.empty(n)
        for i in range(n):
            v = F.sample(rng, T)
            p = G.sample(rng, T)
            res = hindsight_opt(v, p, 0.15 * T, grid=0.05)
            assert res.exact
            vals[i] = res.value
        return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n))

    m240, se240 = sample_hindsight(240)
    m960, se960 = sample_hindsight(960)
    assert m240 <= 240 * dlp + 3 * se240
    assert m960 <= 960 * dlp + 3 * se960
    # square-root envelope with the constant fit at the small horizon
    c = max(240 * dlp - m240, 0.0) / np.sqrt(240) + 3 * se240 / np.sqrt(240)
    assert m960 >= 960 * dlp - c * np.sqrt(960)
