"""Named instance generators and instance serialization."""

import numpy as np
import pytest

from throttlebench.benchmarks import dlp_opt, fluid_opt, hindsight_opt
from throttlebench.distributions import interim_curves
from throttlebench.instances import (
    instance_from_text,
    instance_to_text,
    pacing_gap_instance,
    prefix_trap_instance,
    random_instance,
    reactive_price_instance,
    singleton_price_instance,
    two_price_instance,
)
from throttlebench.model import run_episode
from throttlebench.strategies import always_enter


def test_two_price_requires_multiple_of_four():
    with pytest.raises(ValueError):
        two_price_instance(10)


def test_two_price_parameters():
    inst = two_price_instance(64)
    F, G = inst.iid_pair()
    assert list(F.points) == [1.0]
    assert G.mean() == pytest.approx(0.5, abs=1e-15)
    assert inst.budget_rate == 0.5 and inst.value_ceiling == 1.0
    assert fluid_opt(F, G, 0.5).per_round_value == pytest.approx(0.5, abs=1e-12)


def test_two_price_sampling_frequency():
    inst = two_price_instance(64)
    _, G = inst.iid_pair()
    draws = G.sample(np.random.default_rng(3), 100_000)
    assert abs(np.mean(draws == 1 / 3) - 0.5) <= 0.01


def test_prefix_trap_parameters():
    inst = prefix_trap_instance(0.5, 1.0, 0.5, 99)
    mix = inst.value_source
    p = inst.price_source.dist.points[0]
    assert p == pytest.approx(6 / 7, abs=1e-15)  # vmax / (1 + eps), eps = 1/6
    assert np.asarray(mix.weights) == pytest.approx([1 / 36, 5 / 36, 5 / 6], abs=1e-12)
    assert sum(mix.weights) == pytest.approx(1.0, abs=1e-12)
    # margin ladder: p (1 + eps^3), p (1 + eps^2), p (1 + eps) = vmax exactly
    v1 = mix.vectors[0]
    assert v1[0] == pytest.approx((6 / 7) * (1 + 1 / 216), abs=1e-15)
    assert v1[33] == pytest.approx((6 / 7) * (1 + 1 / 36), abs=1e-15)
    assert v1[66] == 1.0
    assert all(float(np.max(v)) <= 1.0 for v in mix.vectors)
    assert all(float(np.min(v)) >= p for v in mix.vectors)


def test_prefix_trap_common_prefix_structure():
    inst = prefix_trap_instance(0.5, 1.0, 0.5, 90)
    mix = inst.value_source
    m, batch = 3, 30
    first = mix.vectors[0]
    for i in range(1, m + 1):
        vec = mix.vectors[i - 1]
        keep = (m + 1 - i) * batch
        assert np.array_equal(vec[:keep], first[:keep])
        assert np.all(vec[keep:] == inst.price_source.dist.points[0])


def test_prefix_trap_batch_cost_fits_budget():
    inst = prefix_trap_instance(0.5, 1.0, 0.5, 120)
    p = inst.price_source.dist.points[0]
    assert p * (120 // 3) <= 0.5 * 120 + 1e-9
    with pytest.raises(ValueError):
        prefix_trap_instance(0.5, 1.0, 1.5, 120)  # delta out of range
    with pytest.raises(ValueError):
        prefix_trap_instance(0.5, 1.0, 0.5, 1)  # horizon too short


def test_prefix_trap_mixture_sampling():
    inst = prefix_trap_instance(0.5, 1.0, 0.5, 30)
    mix = inst.value_source
    rng = np.random.default_rng(5)
    counts = np.zeros(3)
    for _ in range(5000):
        counts[mix.pick_index(rng)] += 1
    assert counts[2] / 5000 == pytest.approx(5 / 6, abs=0.02)


def test_reactive_price_parameters():
    inst = reactive_price_instance(1.0, 100)
    ps = inst.price_source
    assert ps.skip_price == pytest.approx(1 / 9, abs=1e-15)
    assert ps.skip_price < 1 / 3
    assert ps.enter_price == pytest.approx(2 / 3 - 1 / 9, abs=1e-15)
    with pytest.raises(ValueError):
        reactive_price_instance(0.0, 100)


def test_reactive_prices_track_decisions():
    inst = reactive_price_instance(1.0, 600)
    traj = run_episode(always_enter(), inst, inst.config("full", 1))
    prices = traj.prices()
    decisions = traj.decisions().astype(bool)
    assert set(np.unique(prices)) == {1 / 9, 2 / 3 - 1 / 9}
    assert np.all(prices[decisions] == 2 / 3 - 1 / 9)
    assert np.all(prices[~decisions] == 1 / 9)
    # entered rounds always win and net exactly the scraped margin
    assert np.all(traj.rewards()[decisions] == pytest.approx(1 / 9, abs=1e-12))


def test_reactive_hindsight_floor():
    inst = reactive_price_instance(1.0, 3000)
    traj = run_episode(always_enter(), inst, inst.config("full", 2))
    res = hindsight_opt(traj.values(), traj.prices(), inst.budget, grid=None)
    assert res.exact
    eps = 1 / 9
    assert res.value >= (1 - 3 * eps) / 3 * 3000 - 1e-9


def test_gap_instance_benchmarks():
    inst = pacing_gap_instance(16)
    F, G = inst.iid_pair()
    assert fluid_opt(F, G, 0.15).per_round_value == pytest.approx(0.10, abs=1e-12)
    assert dlp_opt(F, G, 0.15).per_round_value == pytest.approx(0.20, abs=1e-12)
    # spend at full participation: mean over the four (value, price) pairs
    curves = interim_curves(G)
    spend = 0.5 * curves.cost(0.4) + 0.5 * curves.cost(1.0)
    assert spend == pytest.approx(0.375, abs=1e-12)
    assert spend > inst.budget_rate


def test_singleton_instance_benchmarks_coincide():
    inst = singleton_price_instance(16)
    F, G = inst.iid_pair()
    f = fluid_opt(F, G, inst.budget_rate).per_round_value
    d = dlp_opt(F, G, inst.budget_rate).per_round_value
    assert f == pytest.approx(d, abs=1e-12)


def test_random_instance_determinism_and_ranges():
    a = random_instance(9, 3, 4, None, 50)
    b = random_instance(9, 3, 4, None, 50)
    assert instance_to_text(a) == instance_to_text(b)
    F, G = a.iid_pair()
    assert np.all((F.points > 0) & (F.points <= 1.0))
    assert np.all((G.points > 0) & (G.points <= 1.0))
    assert abs(F.weights.sum() - 1.0) <= 1e-12
    assert abs(G.weights.sum() - 1.0) <= 1e-12
    # atoms sit on the 1/120 grid for exact hindsight accounting
    assert np.allclose(np.rint(F.points * 120) / 120, F.points, atol=1e-12)
    with pytest.raises(ValueError):
        random_instance(0, 0, 3)


def test_serialization_round_trips_exactly():
    cases = [
        two_price_instance(8),
        prefix_trap_instance(0.5, 1.0, 0.5, 12),
        reactive_price_instance(2.5, 10),
        pacing_gap_instance(20),
        random_instance(3, 4, 2, None, 24),
    ]
    for inst in cases:
        text = instance_to_text(inst)
        again = instance_from_text(text)
        assert instance_to_text(again) == text
        assert again.horizon == inst.horizon
        assert again.budget_rate == inst.budget_rate


def test_serialization_rejects_garbage():
    with pytest.raises(ValueError):
        instance_from_text("not an instance\n")
    with pytest.raises(ValueError):
        instance_from_text("throttlebench-instance 1\nname = x\nhorizon = 4\n"
                           "rho = 0.5\nvmax = 1.0\ngrid = none\n")
