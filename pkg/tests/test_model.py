"""Round settlement and the episode loop."""

import numpy as np
import pytest

from throttlebench.instances import FixedPrices, FixedValues, Instance, two_price_instance
from throttlebench.model import EpisodeConfig, InfoMode, run_episode, settle_round
from throttlebench.strategies import OgdCb, always_enter, always_skip


def fixed_instance(values, prices, rho, name="fixed"):
    values = np.asarray(values, dtype=float)
    prices = np.asarray(prices, dtype=float)
    return Instance(name, len(values), rho, 1.0, FixedValues(values), FixedPrices(prices))


def test_settle_winning_round():
    out = settle_round(1.0, 1 / 3, 1)
    assert out.reward == pytest.approx(2 / 3) and out.cost == pytest.approx(1 / 3)


def test_settle_losing_bid_pays_nothing():
    out = settle_round(0.5, 0.7, 1)
    assert out.reward == 0.0 and out.cost == 0.0


def test_settle_non_participation():
    out = settle_round(1.0, 0.4, 0)
    assert out.reward == 0.0 and out.cost == 0.0


def test_settle_tie_is_a_win():
    out = settle_round(0.6, 0.6, 1)
    assert out.cost == 0.6 and out.reward == 0.0


def test_settle_validates_inputs():
    with pytest.raises(ValueError):
        settle_round(1.2, 0.5, 1)
    with pytest.raises(ValueError):
        settle_round(0.5, -0.1, 1)
    with pytest.raises(ValueError):
        settle_round(0.5, 0.5, 2)


def test_settle_conservation_identity():
    rng = np.random.default_rng(3)
    for _ in range(200):
        v, p = rng.random(2)
        x = int(rng.integers(2))
        out = settle_round(v, p, x)
        assert out.reward + out.cost == pytest.approx(x * v * (v >= p), abs=1e-15)
        assert out.reward == pytest.approx(x * max(v - p, 0.0), abs=1e-15)
        assert out.cost == pytest.approx(x * p * (v >= p), abs=1e-15)


def test_config_validation():
    with pytest.raises(ValueError):
        EpisodeConfig(horizon=0, budget_rate=0.5)
    with pytest.raises(ValueError):
        EpisodeConfig(horizon=10, budget_rate=0.0)
    with pytest.raises(ValueError):
        EpisodeConfig(horizon=10, budget_rate=1.5, value_ceiling=1.0)
    with pytest.raises(ValueError):
        EpisodeConfig(horizon=1, budget_rate=0.5, value_ceiling=1.0)  # budget below ceiling


def test_always_skip_earns_and_spends_nothing():
    inst = two_price_instance(16)
    traj = run_episode(always_skip(), inst, inst.config("full", 0))
    assert traj.total_reward == 0.0 and traj.total_cost == 0.0
    assert traj.stop_round == 0
    assert not traj.decisions().any()


def test_hand_simulated_four_round_episode():
    # v = 1, p = 1/3, rho = 1/2, T = 4: all four rounds enter, cost 4/3, reward 8/3
    inst = fixed_instance([1, 1, 1, 1], [1 / 3] * 4, 0.5)
    traj = run_episode(always_enter(), inst, inst.config("full", 0))
    assert traj.total_cost == pytest.approx(4 / 3)
    assert traj.total_reward == pytest.approx(8 / 3)
    assert traj.stop_round == 4
    assert list(traj.decisions()) == [1, 1, 1, 1]


def test_break_fires_after_the_deduction():
    # v = 1, p = 1, rho = 1: remaining falls 3 -> 2 -> 1 -> 0; the check runs
    # after each deduction, so every round is still entered
    inst = fixed_instance([1, 1, 1], [1, 1, 1], 1.0)
    traj = run_episode(always_enter(), inst, inst.config("full", 0))
    assert list(traj.decisions()) == [1, 1, 1]
    assert traj.total_cost == pytest.approx(3.0)
    assert traj.total_reward == 0.0
    assert traj.stop_round == 3


def test_rounds_after_exhaustion_are_forced_zero():
    # p = 0.9 each round, budget 2.7: after two wins remaining is 0.9 < 1
    inst = fixed_instance([1] * 6, [0.9] * 6, 0.45)
    traj = run_episode(always_enter(), inst, inst.config("full", 0))
    assert list(traj.decisions()) == [1, 1, 0, 0, 0, 0]
    assert traj.stop_round == 2
    assert len(traj.rounds) == 6


def test_prefix_spend_never_exceeds_budget():
    inst = two_price_instance(128)
    for seed in range(5):
        traj = run_episode(always_enter(), inst, inst.config("full", seed))
        assert np.all(np.cumsum(traj.costs()) <= inst.budget + 1e-9)


def test_partial_mode_observation_count_equals_entries():
    inst = two_price_instance(64)
    strat = OgdCb(64, 0.5, 1.0)
    traj = run_episode(strat, inst, inst.config("partial", 9))
    assert strat.store.count == int(traj.decisions().sum())


def test_full_mode_reveals_every_round_even_after_exhaustion():
    inst = fixed_instance([1] * 6, [0.9] * 6, 0.45)
    strat = OgdCb(6, 0.45, 1.0)
    traj = run_episode(strat, inst, inst.config("full", 0))
    assert traj.stop_round == 2
    assert strat.store.count == 6


def test_replay_is_bit_identical():
    inst = two_price_instance(32)
    a = run_episode(OgdCb(32, 0.5, 1.0), inst, inst.config("partial", 77))
    b = run_episode(OgdCb(32, 0.5, 1.0), inst, inst.config("partial", 77))
    assert a.rounds == b.rounds
    assert a.dual_path == b.dual_path
    assert (a.total_reward, a.total_cost, a.stop_round) == (b.total_reward, b.total_cost, b.stop_round)


def test_mismatched_config_rejected():
    inst = two_price_instance(16)
    with pytest.raises(ValueError):
        run_episode(always_enter(), inst, EpisodeConfig(8, 0.5, 1.0, InfoMode.FULL, 0))
    with pytest.raises(ValueError):
        run_episode(always_enter(), inst, EpisodeConfig(16, 0.4, 1.0, InfoMode.FULL, 0))
