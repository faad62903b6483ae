"""Experiment execution: cells, episode batches, structural checks, reports."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..benchmarks import dlp_opt, fluid_opt, hindsight_opt
from ..model import InfoMode, run_episode
from ..strategies import entering_rate_floor, make_strategy
from .config import ExperimentConfig, StrategySpec, derive_episode_seed
from .fastpath import realize_batch, run_ogdcb_batch, run_pacing_batch, run_static_batch
from .slope import SlopeFit, fit_slope

CHUNK_ELEMS = 8_000_000
LAM_TOL = 1e-9
SPEND_TOL = 1e-9
RATIO_TOL = 1e-12
OGD_TOL = 1e-6

KERNEL_KINDS = {"ogdcb", "pacing", "static", "always_enter", "always_skip"}


@dataclass
class CellResult:
    """Raw per-episode outcomes of one (instance, strategy, horizon, mode) cell."""

    horizon: int
    mode: InfoMode
    rewards: np.ndarray
    spends: np.ndarray
    stop_rounds: np.ndarray
    enter_counts: np.ndarray
    hindsight: np.ndarray | None
    hindsight_exact: np.ndarray | None
    min_obs_ratio: float
    violations: dict = field(default_factory=dict)

    @property
    def replications(self) -> int:
        return self.rewards.size


@dataclass(frozen=True)
class RatioStats:
    """Competitive-ratio statistics for one cell.

    The primary metric is the additive per-round gap (reward - mu * hindsight)/T;
    raw reward/hindsight ratios exclude episodes with zero hindsight value,
    which are only counted.
    """

    mean_gap: float
    se_gap: float
    mean_ratio: float
    zero_hindsight_count: int


def competitive_ratio_cell(rewards, hindsight_values, mu: float, horizon: int) -> RatioStats:
    rewards = np.asarray(rewards, dtype=float)
    hind = np.asarray(hindsight_values, dtype=float)
    gaps = (rewards - mu * hind) / horizon
    n = gaps.size
    se = float(gaps.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    positive = hind > 0
    mean_ratio = float((rewards[positive] / hind[positive]).mean()) if positive.any() else float("nan")
    return RatioStats(float(gaps.mean()), se, mean_ratio, int(n - positive.sum()))


def _check(violations: dict, name: str, bad_count: int) -> None:
    if bad_count:
        violations[name] = violations.get(name, 0) + int(bad_count)


def _kernel_cell(instance, spec: StrategySpec, mode: InfoMode, seeds,
                 want_hindsight: bool, check_invariants: bool) -> CellResult:
    T = instance.horizon
    rho = instance.budget_rate
    vmax = instance.value_ceiling
    params = spec.param_dict
    need_gamma = spec.kind in ("static", "always_enter", "always_skip")

    rewards = []
    spends = []
    stops = []
    enters = []
    hind_vals = [] if want_hindsight else None
    hind_exact = [] if want_hindsight else None
    min_ratio = math.inf
    violations: dict = {}

    chunk_w = max(1, min(len(seeds), CHUNK_ELEMS // max(T, 1)))
    for lo in range(0, len(seeds), chunk_w):
        chunk = seeds[lo:lo + chunk_w]
        batch = realize_batch(instance, chunk, need_gamma=need_gamma)
        if spec.kind == "ogdcb":
            stats = run_ogdcb_batch(batch, budget_rate=rho, value_ceiling=vmax,
                                    info_mode=mode, collect_checks=True)
            if check_invariants:
                cap = vmax / rho - 1.0
                _check(violations, "dual_above_cap", int((stats.lam_max > cap + LAM_TOL).sum()))
                _check(violations, "dual_negative", int((stats.lam_final < 0.0).sum()))
                _check(violations, "ogd_inequality_zero", int((stats.ogd_slack_zero < -OGD_TOL).sum()))
                _check(violations, "ogd_inequality_cap", int((stats.ogd_slack_cap < -OGD_TOL).sum()))
                if mode is InfoMode.PARTIAL:
                    floor = entering_rate_floor(rho, vmax)
                    _check(violations, "entering_rate",
                           int((stats.obs_ratio_min < floor - RATIO_TOL).sum()))
            min_ratio = min(min_ratio, float(stats.obs_ratio_min.min()))
        elif spec.kind == "pacing":
            stats = run_pacing_batch(batch, budget_rate=rho, value_ceiling=vmax,
                                     step=params.get("step"), mu_cap=params.get("mu_cap"))
        else:
            pi = {"always_enter": 1.0, "always_skip": 0.0}.get(spec.kind, params.get("pi"))
            stats = run_static_batch(batch, pi, budget_rate=rho, value_ceiling=vmax)
        if check_invariants:
            _check(violations, "overspend", int((stats.spend > rho * T + SPEND_TOL).sum()))
        rewards.append(stats.reward)
        spends.append(stats.spend)
        stops.append(stats.stop_round)
        enters.append(stats.enter_count)
        if want_hindsight:
            for e in range(len(chunk)):
                res = hindsight_opt(batch.values[:, e], batch.prices_column(e),
                                    rho * T, grid=instance.grid)
                hind_vals.append(res.value)
                hind_exact.append(res.exact)

    return CellResult(
        horizon=T, mode=mode,
        rewards=np.concatenate(rewards), spends=np.concatenate(spends),
        stop_rounds=np.concatenate(stops), enter_counts=np.concatenate(enters),
        hindsight=np.array(hind_vals) if want_hindsight else None,
        hindsight_exact=np.array(hind_exact, dtype=bool) if want_hindsight else None,
        min_obs_ratio=(min_ratio if min_ratio != math.inf else float("nan")),
        violations=violations,
    )


def ogdcb_scalar_checks(traj, strategy, instance, mode: InfoMode) -> dict:
    """Structural checks for one sequential dual-gradient episode, recomputed
    from the trajectory and the strategy's decision history."""
    rho = instance.budget_rate
    vmax = instance.value_ceiling
    cap = vmax / rho - 1.0
    out = {}
    dual = np.asarray(traj.dual_path)
    out["dual_above_cap"] = int(np.any(dual > cap + LAM_TOL))
    out["dual_negative"] = int(np.any(dual < 0.0))
    out["overspend"] = int(traj.total_cost > rho * traj.horizon + SPEND_TOL)

    # live rounds: up to and including the round whose deduction broke the budget
    costs = traj.costs()
    remaining = rho * traj.horizon - np.cumsum(costs)
    broke = np.flatnonzero(remaining < vmax)
    live_end = int(broke[0]) + 1 if broke.size else traj.horizon

    decisions = traj.decisions()
    if mode is InfoMode.PARTIAL:
        obs_before = np.concatenate(([0], np.cumsum(decisions)))  # |I_t| = entries before t
    else:
        obs_before = np.arange(traj.horizon + 1)
    ts = np.arange(2, live_end + 1)
    ratios = obs_before[ts - 1] / (ts - 1)
    out["min_obs_ratio"] = float(ratios.min()) if ts.size else float("nan")
    floor = entering_rate_floor(rho, vmax)
    out["entering_rate"] = int(mode is InfoMode.PARTIAL and ts.size
                               and ratios.min() < floor - RATIO_TOL)

    # path-wise OGD inequality up to the stopping round
    t0 = traj.stop_round
    sum_a = sum_g = sum_eta = 0.0
    for (t, eps, r_est, c_est, x) in strategy.history:
        if t < 2 or t > t0:
            continue
        g = (c_est if x else 0.0) - rho
        sum_a += dual[t - 1] * g
        sum_g += g
        sum_eta += 1.0 / (vmax * math.sqrt(t))
    eta_stop = 1.0 / (vmax * math.sqrt(max(t0, 1)))
    penalty = cap * cap / eta_stop + vmax * vmax * sum_eta
    out["ogd_inequality_zero"] = int(sum_a < -penalty - OGD_TOL)
    out["ogd_inequality_cap"] = int(sum_a < cap * sum_g - penalty - OGD_TOL)
    return out


def _scalar_cell(instance, spec: StrategySpec, mode: InfoMode, seeds,
                 want_hindsight: bool, check_invariants: bool) -> CellResult:
    T = instance.horizon
    rho = instance.budget_rate
    rewards = np.empty(len(seeds))
    spends = np.empty(len(seeds))
    stops = np.empty(len(seeds), dtype=np.int64)
    enters = np.empty(len(seeds), dtype=np.int64)
    hind_vals = np.empty(len(seeds)) if want_hindsight else None
    hind_exact = np.empty(len(seeds), dtype=bool) if want_hindsight else None
    min_ratio = math.inf
    violations: dict = {}

    for e, seed in enumerate(seeds):
        strategy = make_strategy(spec.kind, spec.param_dict, horizon=T,
                                 budget_rate=rho, value_ceiling=instance.value_ceiling)
        traj = run_episode(strategy, instance, instance.config(mode, seed))
        rewards[e] = traj.total_reward
        spends[e] = traj.total_cost
        stops[e] = traj.stop_round
        enters[e] = int(traj.decisions().sum())
        if check_invariants:
            if spec.kind == "ogdcb":
                checks = ogdcb_scalar_checks(traj, strategy, instance, mode)
                min_ratio = min(min_ratio, checks.pop("min_obs_ratio"))
                for name, bad in checks.items():
                    _check(violations, name, bad)
            else:
                _check(violations, "overspend",
                       int(traj.total_cost > rho * T + SPEND_TOL))
        if want_hindsight:
            res = hindsight_opt(traj.values(), traj.prices(), rho * T, grid=instance.grid)
            hind_vals[e] = res.value
            hind_exact[e] = res.exact

    return CellResult(
        horizon=T, mode=mode, rewards=rewards, spends=spends, stop_rounds=stops,
        enter_counts=enters, hindsight=hind_vals, hindsight_exact=hind_exact,
        min_obs_ratio=(min_ratio if min_ratio != math.inf else float("nan")),
        violations=violations,
    )


def run_cell(instance, spec: StrategySpec, mode: InfoMode, seeds, *,
             want_hindsight: bool = True, check_invariants: bool = True) -> CellResult:
    """Run one cell, on the lockstep kernels when the instance and strategy
    allow it, otherwise sequentially.  Both paths are observation-equivalent
    (asserted bit-for-bit in the test suite)."""
    if not instance.adaptive_prices and spec.kind in KERNEL_KINDS:
        return _kernel_cell(instance, spec, mode, seeds, want_hindsight, check_invariants)
    return _scalar_cell(instance, spec, mode, seeds, want_hindsight, check_invariants)


# ---------------------------------------------------------------------------
# Whole experiments
# ---------------------------------------------------------------------------

CSV_COLUMNS = [
    "experiment_id", "instance", "strategy", "info_mode", "T", "replications",
    "mean_reward", "se_reward", "opt_fluid", "opt_dlp", "mean_hindsight",
    "mean_regret", "se_regret", "mean_gap_mu", "min_entering_ratio", "mean_stop_round",
]


@dataclass
class CellRow:
    experiment_id: str
    instance: str
    strategy: str
    info_mode: str
    T: int
    replications: int
    mean_reward: float
    se_reward: float
    opt_fluid: float
    opt_dlp: float
    mean_hindsight: float
    mean_regret: float
    se_regret: float
    mean_gap_mu: float
    min_entering_ratio: float
    mean_stop_round: float

    def as_csv(self) -> str:
        vals = []
        for col in CSV_COLUMNS:
            v = getattr(self, col)
            vals.append(repr(v) if isinstance(v, float) else str(v))
        return ",".join(vals)


@dataclass
class Report:
    rows: list
    slopes: dict          # (instance, strategy, info_mode) -> SlopeFit
    violations: dict      # check name -> count over every cell

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        lines.extend(row.as_csv() for row in self.rows)
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_csv())

    def total_violations(self) -> int:
        return sum(self.violations.values())


def _run_cell_task(task) -> tuple:
    (name, inst_spec, spec, mode_value, T, base_seed, replications,
     want_hindsight, check_invariants, mu) = task
    instance = inst_spec.build(T)
    mode = InfoMode(mode_value)
    seeds = [derive_episode_seed(base_seed, T, spec.label, rep) for rep in range(replications)]
    cell = run_cell(instance, spec, mode, seeds,
                    want_hindsight=want_hindsight, check_invariants=check_invariants)

    pair = instance.iid_pair()
    if pair is not None:
        opt_fluid = fluid_opt(pair[0], pair[1], instance.budget_rate).per_round_value
        opt_dlp = dlp_opt(pair[0], pair[1], instance.budget_rate).per_round_value
    else:
        opt_fluid = opt_dlp = float("nan")

    n = cell.replications
    mean_reward = float(cell.rewards.mean())
    se_reward = float(cell.rewards.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    mean_regret = T * opt_fluid - mean_reward if not math.isnan(opt_fluid) else float("nan")
    if cell.hindsight is not None:
        mu_eff = mu if mu is not None else instance.budget_rate / instance.value_ceiling
        ratio = competitive_ratio_cell(cell.rewards, cell.hindsight, mu_eff, T)
        mean_hindsight = float(cell.hindsight.mean())
        mean_gap = ratio.mean_gap
    else:
        mean_hindsight = float("nan")
        mean_gap = float("nan")

    row = CellRow(
        experiment_id=name,
        instance=instance.name,
        strategy=spec.label,
        info_mode=mode.value,
        T=T,
        replications=n,
        mean_reward=mean_reward,
        se_reward=se_reward,
        opt_fluid=opt_fluid,
        opt_dlp=opt_dlp,
        mean_hindsight=mean_hindsight,
        mean_regret=mean_regret,
        se_regret=se_reward,
        mean_gap_mu=mean_gap,
        min_entering_ratio=cell.min_obs_ratio,
        mean_stop_round=float(cell.stop_rounds.mean()),
    )
    return row, cell.violations


def run_experiment(config: ExperimentConfig) -> Report:
    """Execute every (mode, strategy, horizon) cell in fixed order and fold
    the results deterministically; identical configs (and seeds) give
    byte-identical reports, serial or pooled."""
    tasks = []
    for mode in config.info_modes:
        for spec in config.strategies:
            for T in config.horizons:
                tasks.append((config.name, config.instance, spec, mode.value, T,
                              config.base_seed, config.replications,
                              config.hindsight, config.invariants, config.mu))

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_run_cell_task, tasks))
    else:
        outcomes = [_run_cell_task(t) for t in tasks]

    rows = []
    violations: dict = {}
    for row, cell_violations in outcomes:
        rows.append(row)
        for k, v in cell_violations.items():
            violations[k] = violations.get(k, 0) + v

    slopes = {}
    for mode in config.info_modes:
        for spec in config.strategies:
            group = [r for r in rows if r.strategy == spec.label and r.info_mode == mode.value]
            pts = [(r.T, r.mean_regret) for r in group if not math.isnan(r.mean_regret)]
            if len([p for p in pts if p[1] > 0]) >= 4:
                key = (group[0].instance, spec.label, mode.value)
                slopes[key] = fit_slope(pts)

    report = Report(rows, slopes, violations)
    if config.output:
        report.write_csv(config.output)
    if config.svg:
        from .report import write_regret_svg
        write_regret_svg(report, config.svg)
    return report
