"""Command-line entry point.

Subcommands:
    run <config.ini>        run an experiment, write the CSV report
    bench <instance> <T>    print the static benchmarks and one hindsight draw
    identity-check <Tmax>   exact big-integer check of the regret-floor series
    validate                full invariant suite

Exit codes: 0 success, 1 configuration error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .benchmarks import dlp_opt, fluid_opt, hindsight_opt, two_price_regret_floor
from .harness.config import ConfigError, load_experiment_config
from .harness.experiment import run_experiment
from .instances import build_instance, instance_from_text


def _cmd_run(args) -> int:
    try:
        config = load_experiment_config(args.config)
    except (ConfigError, OSError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    report = run_experiment(config)
    print(f"{len(report.rows)} cells")
    for row in report.rows:
        print(f"  {row.instance} / {row.strategy} / {row.info_mode} T={row.T}: "
              f"mean reward {row.mean_reward:.4f}, mean regret {row.mean_regret:.4f}")
    for key, fit in report.slopes.items():
        print(f"slope {key}: {fit.slope:.3f}  CI [{fit.ci_low:.3f}, {fit.ci_high:.3f}]")
    if config.output:
        print(f"report written to {config.output}")
    if report.total_violations():
        print(f"INVARIANT VIOLATIONS: {report.violations}", file=sys.stderr)
        return 2
    return 0


def _load_instance(token: str, horizon: int):
    if os.path.exists(token):
        with open(token, "r", encoding="utf-8") as fh:
            inst = instance_from_text(fh.read())
        if inst.horizon != horizon:
            raise ConfigError(f"instance file horizon {inst.horizon} != requested {horizon}")
        return inst
    return build_instance(token, horizon)


def _cmd_bench(args) -> int:
    try:
        inst = _load_instance(args.instance, args.horizon)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    pair = inst.iid_pair()
    print(f"instance {inst.name}: T={inst.horizon} rho={inst.budget_rate} vmax={inst.value_ceiling}")
    if pair is not None:
        fluid = fluid_opt(pair[0], pair[1], inst.budget_rate)
        dlp = dlp_opt(pair[0], pair[1], inst.budget_rate)
        print(f"fluid optimum per round:             {fluid.per_round_value!r} "
              f"(binding={fluid.binding})")
        print(f"price-conditional optimum per round: {dlp.per_round_value!r} "
              f"(threshold={dlp.shading_threshold:.6g})")
    else:
        print("fluid / price-conditional optima: undefined (value or price source not i.i.d.)")
    if inst.adaptive_prices:
        print("hindsight draw: skipped (reactive prices need a strategy in the loop)")
        return 0
    ss = np.random.SeedSequence(args.seed)
    v_ss, p_ss, _ = ss.spawn(3)
    values = inst.value_source.realize(np.random.default_rng(v_ss), inst.horizon)
    prices = inst.price_source.realize(np.random.default_rng(p_ss), inst.horizon)
    res = hindsight_opt(values, prices, inst.budget, grid=inst.grid)
    kind = "exact" if res.exact else f"bracketed (upper {res.upper!r})"
    print(f"hindsight draw (seed {args.seed}):        {res.value!r} {kind}, "
          f"per round {res.value / inst.horizon!r}")
    return 0


def _cmd_identity_check(args) -> int:
    if args.tmax < 4:
        print("config error: Tmax must be at least 4", file=sys.stderr)
        return 1
    failures = 0
    for T in range(4, args.tmax + 1, 4):
        floor = two_price_regret_floor(T)
        ok = floor.series == floor.closed_form
        failures += not ok
        print(f"T={T:5d}  series={floor.series}  closed={floor.closed_form}  "
              f"{'OK' if ok else 'MISMATCH'}")
    if failures:
        print(f"{failures} mismatches", file=sys.stderr)
        return 2
    print("identity holds for every multiple of 4 up to", args.tmax)
    return 0


def _cmd_validate(args) -> int:
    from .harness.validate import run_validation

    ok, lines = run_validation()
    for line in lines:
        print(line)
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="throttlebench", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from an INI config")
    p_run.add_argument("config")
    p_run.set_defaults(fn=_cmd_run)

    p_bench = sub.add_parser("bench", help="print benchmarks for an instance")
    p_bench.add_argument("instance", help="instance file path or generator name")
    p_bench.add_argument("horizon", type=int)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(fn=_cmd_bench)

    p_id = sub.add_parser("identity-check", help="exact regret-floor series check")
    p_id.add_argument("tmax", type=int)
    p_id.set_defaults(fn=_cmd_identity_check)

    p_val = sub.add_parser("validate", help="full invariant suite")
    p_val.set_defaults(fn=_cmd_validate)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
