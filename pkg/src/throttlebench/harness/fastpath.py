"""Vectorized episode kernels.

Each kernel runs a batch of independent episodes in lockstep over rounds,
one numpy vector per state variable, and reproduces the scalar strategy /
``run_episode`` path bit for bit: identical per-episode random streams,
identical floating-point expression shapes, identical break rule.  Only
non-reactive price sources are supported here; reactive instances go through
the sequential runner.

The dual-gradient kernel also accumulates, per episode, everything the
structural checks need: the extreme dual values, the minimum observation
ratio under partial feedback, and the path-wise online-gradient-descent
inequality sums up to the stopping round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import InfoMode
from ..strategies import entering_rate_floor

LN2 = math.log(2.0)


@dataclass
class BatchRealization:
    """Pre-drawn randomness for a batch of episodes (columns)."""

    values: np.ndarray       # [T, C] float64
    price_idx: np.ndarray    # [T, C] intp, indices into price_atoms
    price_atoms: np.ndarray  # [k] float64, ascending
    gammas: np.ndarray | None = None  # [T, C] uniforms for randomized strategies

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def prices_column(self, e: int) -> np.ndarray:
        return self.price_atoms[self.price_idx[:, e]]


def realize_batch(instance, seeds, need_gamma: bool = False) -> BatchRealization:
    """Draw the per-episode value/price/randomness streams for ``seeds``.

    Stream layout matches ``run_episode``: each episode seed spawns
    (values, prices, gamma) child streams in that order.
    """
    if instance.adaptive_prices:
        raise ValueError("reactive price sources need the sequential runner")
    T = instance.horizon
    C = len(seeds)
    values = np.empty((T, C))
    price_idx = np.empty((T, C), dtype=np.intp)
    gammas = np.empty((T, C)) if need_gamma else None
    atoms = None
    for e, seed in enumerate(seeds):
        ss = np.random.SeedSequence(seed)
        v_ss, p_ss, g_ss = ss.spawn(3)
        values[:, e] = instance.value_source.realize(np.random.default_rng(v_ss), T)
        idx, atoms = instance.price_source.realize_indices(np.random.default_rng(p_ss), T)
        price_idx[:, e] = idx
        if need_gamma:
            gammas[:, e] = np.random.default_rng(g_ss).random(T)
    if len(atoms) <= 255:
        price_idx = price_idx.astype(np.uint8)
    return BatchRealization(values, price_idx, np.asarray(atoms, dtype=float), gammas)


@dataclass
class BatchStats:
    """Per-episode outcomes of one kernel run (arrays of length C)."""

    reward: np.ndarray
    spend: np.ndarray
    stop_round: np.ndarray        # last round entered (0 if none)
    dead_round: np.ndarray        # round after which the budget shut entry off (0 if never)
    enter_count: np.ndarray
    # dual-gradient diagnostics (None for other strategies)
    lam_final: np.ndarray | None = None
    lam_max: np.ndarray | None = None
    obs_ratio_min: np.ndarray | None = None   # min over live t >= 2 of |I_t| / (t - 1)
    ogd_slack_zero: np.ndarray | None = None  # OGD inequality slack at lambda = 0
    ogd_slack_cap: np.ndarray | None = None   # ... at lambda = vmax/rho - 1


def run_ogdcb_batch(batch: BatchRealization, *, budget_rate: float, value_ceiling: float,
                    info_mode: InfoMode, collect_checks: bool = True) -> BatchStats:
    """Lockstep dual-gradient throttling over a batch of episodes."""
    T, C = batch.values.shape
    atoms = batch.price_atoms
    k = atoms.size
    rho = budget_rate
    vmax = value_ceiling
    partial = info_mode is InfoMode.PARTIAL
    const = LN2 + 2.0 * math.log(T)
    dual_cap = vmax / rho - 1.0
    rate_floor = entering_rate_floor(rho, vmax)

    lam = np.zeros(C)
    counts = np.zeros((k, C))
    nobs = np.zeros(C)
    remaining = np.full(C, rho * T)
    alive = np.ones(C, dtype=bool)
    reward = np.zeros(C)
    spend = np.zeros(C)
    stop = np.zeros(C, dtype=np.int64)
    dead = np.zeros(C, dtype=np.int64)
    entered = np.zeros(C, dtype=np.int64)

    lam_max = np.zeros(C)
    ratio_min = np.full(C, np.inf)
    sum_a = np.zeros(C)    # sum lam_t (x c_est - rho) over live t in [2, .]
    sum_g = np.zeros(C)    # sum (x c_est - rho)
    sum_eta = np.zeros(C)
    snap_a = np.zeros(C)   # the three sums frozen at the last entered round
    snap_g = np.zeros(C)
    snap_eta = np.zeros(C)

    for t in range(1, T + 1):
        v = batch.values[t - 1]
        pid = batch.price_idx[t - 1]
        p = atoms[pid]
        if t == 1:
            x = alive.copy()
        else:
            eps = np.sqrt(const / (2.0 * nobs))
            racc = np.zeros(C)
            cacc = np.zeros(C)
            for j in range(k):
                cnt = counts[j]
                a = atoms[j]
                racc = racc + cnt * np.maximum(v - a, 0.0)
                cacc = cacc + cnt * np.where(v >= a, a, 0.0)
            r_est = racc / nobs + eps * v
            c_est = cacc / nobs - 2.0 * eps * v
            x = alive & (r_est >= lam * c_est)
            eta = 1.0 / (vmax * math.sqrt(t))
            g = np.where(x, c_est, 0.0) - rho
            if collect_checks:
                sum_a = np.where(alive, sum_a + lam * g, sum_a)
                sum_g = np.where(alive, sum_g + g, sum_g)
                sum_eta = np.where(alive, sum_eta + eta, sum_eta)
                ratio_min = np.where(alive, np.minimum(ratio_min, nobs / (t - 1)), ratio_min)
            lam = np.where(alive, np.maximum(lam + eta * g, 0.0), lam)
            lam_max = np.maximum(lam_max, np.where(alive, lam, 0.0))

        win = x & (v >= p)
        reward += np.where(win, v - p, 0.0)
        cost = np.where(win, p, 0.0)
        spend += cost
        remaining = remaining - cost
        entered += x
        stop = np.where(x, t, stop)
        if collect_checks:
            snap_a = np.where(x, sum_a, snap_a)
            snap_g = np.where(x, sum_g, snap_g)
            snap_eta = np.where(x, sum_eta, snap_eta)

        observed = x if partial else alive
        for j in range(k):
            counts[j] += (observed & (pid == j)).astype(float)
        nobs += observed

        newly_dead = alive & (remaining < vmax)
        dead = np.where(newly_dead, t, dead)
        alive &= ~newly_dead

    if collect_checks:
        eta_stop = 1.0 / (vmax * np.sqrt(np.maximum(stop, 1)))
        penalty = dual_cap * dual_cap / eta_stop + vmax * vmax * snap_eta
        slack0 = snap_a - (-penalty)
        slack_cap = snap_a - (dual_cap * snap_g - penalty)
        ratio_min = np.where(np.isinf(ratio_min), 1.0, ratio_min)
    else:
        slack0 = slack_cap = None
        ratio_min = None

    return BatchStats(reward, spend, stop, dead, entered,
                      lam_final=lam, lam_max=lam_max, obs_ratio_min=ratio_min,
                      ogd_slack_zero=slack0, ogd_slack_cap=slack_cap)


def run_pacing_batch(batch: BatchRealization, *, budget_rate: float, value_ceiling: float,
                     step: float | None = None, mu_cap: float | None = None) -> BatchStats:
    """Lockstep adaptive pacing over a batch of episodes."""
    T, C = batch.values.shape
    rho = budget_rate
    vmax = value_ceiling
    if step is None:
        step = 1.0 / (vmax * math.sqrt(T))
    if mu_cap is None:
        mu_cap = vmax / rho - 1.0

    mu = np.zeros(C)
    remaining = np.full(C, rho * T)
    alive = np.ones(C, dtype=bool)
    reward = np.zeros(C)
    spend = np.zeros(C)
    stop = np.zeros(C, dtype=np.int64)
    dead = np.zeros(C, dtype=np.int64)
    entered = np.zeros(C, dtype=np.int64)

    for t in range(1, T + 1):
        v = batch.values[t - 1]
        p = batch.price_atoms[batch.price_idx[t - 1]]
        x = alive
        bid = v / (1.0 + mu)
        win = x & (bid >= p)
        z = np.where(win, p, 0.0)
        reward += np.where(win, v - p, 0.0)
        spend += z
        remaining = remaining - z
        entered += x
        stop = np.where(x, t, stop)
        mu = np.where(alive, np.minimum(np.maximum(mu - step * (rho - z), 0.0), mu_cap), mu)
        newly_dead = alive & (remaining < vmax)
        dead = np.where(newly_dead, t, dead)
        alive = alive & ~newly_dead

    return BatchStats(reward, spend, stop, dead, entered)


def run_static_batch(batch: BatchRealization, participation, *, budget_rate: float,
                     value_ceiling: float) -> BatchStats:
    """Lockstep static randomized throttling; needs gammas in the batch."""
    if batch.gammas is None:
        raise ValueError("static kernel needs pre-drawn gammas")
    T, C = batch.values.shape
    rho = budget_rate
    vmax = value_ceiling
    if callable(participation):
        prob_fn = np.vectorize(participation, otypes=[float])
    else:
        prob_fn = None
        const_prob = float(participation)

    remaining = np.full(C, rho * T)
    alive = np.ones(C, dtype=bool)
    reward = np.zeros(C)
    spend = np.zeros(C)
    stop = np.zeros(C, dtype=np.int64)
    dead = np.zeros(C, dtype=np.int64)
    entered = np.zeros(C, dtype=np.int64)

    for t in range(1, T + 1):
        v = batch.values[t - 1]
        p = batch.price_atoms[batch.price_idx[t - 1]]
        prob = prob_fn(v) if prob_fn is not None else const_prob
        x = alive & (batch.gammas[t - 1] < prob)
        win = x & (v >= p)
        cost = np.where(win, p, 0.0)
        reward += np.where(win, v - p, 0.0)
        spend += cost
        remaining = remaining - cost
        entered += x
        stop = np.where(x, t, stop)
        newly_dead = alive & (remaining < vmax)
        dead = np.where(newly_dead, t, dead)
        alive = alive & ~newly_dead

    return BatchStats(reward, spend, stop, dead, entered)
