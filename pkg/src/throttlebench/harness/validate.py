"""Self-contained invariant bundle behind the ``validate`` CLI command.

Each check recomputes its target through an independent route (exhaustive
enumeration, vertex enumeration, closed forms, or the sequential runner) and
compares against the production path.  Runs in well under a minute.
"""

from __future__ import annotations

import numpy as np

from ..benchmarks import (
    dlp_opt,
    fluid_opt,
    hindsight_by_enumeration,
    hindsight_opt,
    lp_max_by_vertex_enumeration,
    two_price_regret_floor,
    two_price_revenue_cap,
)
from ..distributions import interim_curves
from ..instances import random_instance, two_price_instance
from ..model import InfoMode, run_episode
from ..strategies import OgdCb
from .config import StrategySpec
from .experiment import run_cell
from .fastpath import realize_batch, run_ogdcb_batch


def _check_counting_identity():
    for T in range(4, 68, 4):
        floor = two_price_regret_floor(T)
        if floor.series != floor.closed_form:
            return False, f"series != closed form at T={T}"
    return True, "series equals closed form for T = 4..64"


def _check_revenue_cap_dominance():
    for T in (4, 8):
        budget_units = 3 * T // 2  # budget in thirds
        pop = np.array([bin(x).count("1") for x in range(1 << T)], dtype=np.int64)
        decisions = np.arange(1 << T, dtype=np.int64)
        for pmask in range(1 << T):
            low = pop[decisions & pmask]
            total = pop[decisions]
            high = total - low
            feasible = low + 2 * high <= budget_units
            best = int((2 * low + high)[feasible].max())
            cap = two_price_revenue_cap(int(pop[pmask]), T)
            if best > 3 * cap:
                return False, f"cap violated at T={T}, prices={pmask:b}"
    return True, "exhaustive revenue search stays below the cap (T = 4, 8)"


def _check_lp_solvers():
    for seed in range(12):
        inst = random_instance(seed, 3, 3, None, 100)
        F, G = inst.iid_pair()
        rho = inst.budget_rate
        curves = interim_curves(G)
        fluid = fluid_opt(F, G, rho).per_round_value
        ref = lp_max_by_vertex_enumeration(
            np.array([fv * curves.reward(float(v)) for v, fv in zip(F.points, F.weights)]),
            np.array([fv * curves.cost(float(v)) for v, fv in zip(F.points, F.weights)]),
            rho)
        if abs(fluid - ref) > 1e-9:
            return False, f"fluid mismatch on seed {seed}: {fluid} vs {ref}"
        dlp = dlp_opt(F, G, rho).per_round_value
        rw, wt = [], []
        for v, fv in zip(F.points, F.weights):
            for p, gw in zip(G.points, G.weights):
                rw.append(fv * gw * max(float(v) - float(p), 0.0))
                wt.append(fv * gw * (float(p) if v >= p else 0.0))
        ref = lp_max_by_vertex_enumeration(np.array(rw), np.array(wt), rho)
        if abs(dlp - ref) > 1e-9:
            return False, f"price-conditional mismatch on seed {seed}: {dlp} vs {ref}"
        if dlp < fluid - 1e-12:
            return False, f"dlp < fluid on seed {seed}"
    return True, "LP solvers match vertex enumeration on 12 random instances"


def _check_hindsight():
    rng = np.random.default_rng(7)
    for trial in range(12):
        inst = random_instance(trial + 100, 3, 3, None, 12)
        F, G = inst.iid_pair()
        v = F.sample(rng, 12)
        p = G.sample(rng, 12)
        budget = inst.budget_rate * 12
        got = hindsight_opt(v, p, budget, grid=inst.grid)
        ref = hindsight_by_enumeration(v, p, budget, inst.grid)
        if not got.exact or got.value != ref:
            return False, f"hindsight mismatch on trial {trial}: {got.value} vs {ref}"
    return True, "hindsight knapsack matches subset enumeration on 12 trials"


def _check_curve_identity():
    for seed in range(8):
        inst = random_instance(seed + 50, 4, 4, None, 100)
        _, G = inst.iid_pair()
        curves = interim_curves(G)
        for v in np.linspace(0.0, 1.0, 21):
            lhs = curves.reward(float(v)) + curves.cost(float(v))
            rhs = float(v) * curves.win_probability(float(v))
            if abs(lhs - rhs) > 1e-12:
                return False, f"reward+cost identity fails at v={v}"
    return True, "reward + cost equals value * win probability on random curves"


def _check_episode_invariants():
    inst = two_price_instance(512)
    spec = StrategySpec.make("ogdcb")
    for mode in (InfoMode.FULL, InfoMode.PARTIAL):
        cell = run_cell(inst, spec, mode, list(range(24)),
                        want_hindsight=False, check_invariants=True)
        if cell.violations:
            return False, f"episode invariant violations: {cell.violations}"
    return True, "dual bounds, spend cap, entering rate, OGD inequality hold (48 episodes)"


def _check_kernel_equivalence():
    inst = two_price_instance(64)
    for mode in (InfoMode.FULL, InfoMode.PARTIAL):
        batch = realize_batch(inst, [5, 6, 7])
        stats = run_ogdcb_batch(batch, budget_rate=inst.budget_rate,
                                value_ceiling=inst.value_ceiling, info_mode=mode)
        for e, seed in enumerate((5, 6, 7)):
            strat = OgdCb(64, inst.budget_rate, inst.value_ceiling)
            traj = run_episode(strat, inst, inst.config(mode, seed))
            if (traj.total_reward != stats.reward[e]
                    or traj.total_cost != stats.spend[e]
                    or traj.stop_round != stats.stop_round[e]):
                return False, f"kernel/sequential divergence (mode={mode.value}, seed={seed})"
    return True, "lockstep kernel reproduces the sequential runner bit for bit"


CHECKS = [
    ("counting-identity", _check_counting_identity),
    ("revenue-cap-dominance", _check_revenue_cap_dominance),
    ("lp-solvers", _check_lp_solvers),
    ("hindsight-exactness", _check_hindsight),
    ("curve-identity", _check_curve_identity),
    ("episode-invariants", _check_episode_invariants),
    ("kernel-equivalence", _check_kernel_equivalence),
]


def run_validation():
    """Run every check; returns (all_passed, list of report lines)."""
    lines = []
    ok = True
    for name, fn in CHECKS:
        passed, detail = fn()
        ok &= passed
        lines.append(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return ok, lines
