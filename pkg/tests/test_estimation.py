"""Confidence radius and the biased reward/cost estimators."""

import math

import pytest

from throttlebench.estimation import (
    ConfidenceRadius,
    SampleStore,
    dkw_epsilon,
    estimate_cost,
    estimate_reward,
)


def store_of(prices):
    s = SampleStore()
    for p in prices:
        s.add(p)
    return s


def test_radius_values():
    # frozen from sqrt((ln 2 + 2 ln T) / (2 n))
    assert dkw_epsilon(8, 100) == pytest.approx(0.7867451760471799, abs=1e-12)
    assert dkw_epsilon(1, 2) == pytest.approx(1.019666990168809, abs=1e-12)


def test_radius_quartering_halves():
    for n, T in ((3, 50), (10, 1000), (128, 10**6)):
        assert dkw_epsilon(4 * n, T) == dkw_epsilon(n, T) / 2.0


def test_radius_rejects_degenerate_inputs():
    with pytest.raises(ValueError):
        dkw_epsilon(0, 100)
    with pytest.raises(ValueError):
        dkw_epsilon(5, 1)


def test_confidence_radius_wrapper():
    cr = ConfidenceRadius.from_counts(8, 100)
    assert cr.epsilon == dkw_epsilon(8, 100)
    assert (cr.sample_count, cr.horizon) == (8, 100)


def test_reward_estimate_examples():
    s = store_of([1 / 3, 2 / 3])
    assert estimate_reward(1.0, s, 0.1) == pytest.approx(0.6, abs=1e-15)
    assert estimate_reward(0.0, s, 12.3) == 0.0
    assert estimate_reward(1.0, store_of([1.0, 1.0]), 0.05) == pytest.approx(0.05, abs=1e-15)


def test_cost_estimate_examples():
    s = store_of([1 / 3, 2 / 3])
    assert estimate_cost(1.0, s, 0.1) == pytest.approx(0.3, abs=1e-15)
    assert estimate_cost(0.0, s, 0.1) == 0.0
    # no sample below the value: the raw (unclipped) estimate goes negative
    assert estimate_cost(0.5, store_of([0.6, 0.7]), 0.1) == pytest.approx(-0.1, abs=1e-15)


def test_tie_counts_as_win_in_cost():
    assert estimate_cost(0.5, store_of([0.5]), 0.0) == 0.5


def test_estimates_permutation_invariant():
    a = store_of([0.1, 0.7, 0.3, 0.7, 0.1])
    b = store_of([0.7, 0.1, 0.7, 0.1, 0.3])
    for v in (0.0, 0.2, 0.55, 1.0):
        assert estimate_reward(v, a, 0.2) == estimate_reward(v, b, 0.2)
        assert estimate_cost(v, a, 0.2) == estimate_cost(v, b, 0.2)


def test_empty_store_rejected():
    with pytest.raises(ValueError):
        estimate_reward(0.5, SampleStore(), 0.1)
    with pytest.raises(ValueError):
        estimate_cost(0.5, SampleStore(), 0.1)


def test_store_counts_and_expansion():
    s = store_of([0.5, 0.25, 0.5])
    assert s.count == 3
    assert s.prices() == [0.25, 0.5, 0.5]


def test_reward_estimate_positive_for_positive_value():
    # the upward bias keeps the estimate strictly positive whenever v > 0,
    # which forces entry when the dual variable is zero
    s = store_of([1.0] * 5)
    eps = dkw_epsilon(5, 100)
    assert estimate_reward(1e-6, s, eps) >= eps * 1e-6 > 0.0
