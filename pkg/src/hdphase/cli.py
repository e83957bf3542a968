"""Command-line entry point: ``hdphase <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import gaussian_extremes as gx
from .errors import BudgetExceededError, DomainError
from .heavy_tail import HeavyTailDistribution, absolute_moment_check, sigma_squared
from .monte_carlo import DataLaw, Estimator, ExperimentConfig
from .runner import (
    load_sweep_spec,
    run_experiment,
    run_sweep,
    self_test,
    sweep_to_json,
    write_csv,
    write_json,
)
from .theory_bounds import classify_regime, nagaev_size_lower_bound, phase_threshold


def _statistic(args) -> gx.Statistic:
    return gx.Statistic.TWO_SIDED if args.two_sided else gx.Statistic.ONE_SIDED


def cmd_critval(args) -> int:
    stat = _statistic(args)
    if args.asymptotic:
        cv = gx.max_critical_asymptotic(args.d, args.alpha, stat)
    else:
        cv = gx.max_critical_exact(args.d, args.alpha, stat)
    out = {"d": cv.d, "alpha": cv.alpha, "value": cv.value,
           "statistic": cv.statistic.value, "method": cv.method.value}
    if cv.a is not None:
        out.update(scale=cv.scale, a=cv.a)
    print(json.dumps(out))
    return 0


def cmd_moments(args) -> int:
    s2 = sigma_squared(args.m, args.tol)
    moment = absolute_moment_check(args.m, args.tol)
    print(json.dumps({
        "m": args.m, "sigma_squared": s2, "mth_moment": moment, "expected": 1 + 2 * args.m,
        "deviation": moment - (1 + 2 * args.m), "mth_moment_unit_variance": (1 + 2 * args.m) / s2 ** (args.m / 2),
    }))
    return 0


def cmd_sample(args) -> int:
    dist = HeavyTailDistribution(args.m)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    draws = dist.sample(rng, args.count)
    text = "\n".join(repr(float(x)) for x in draws) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_size(args) -> int:
    config = ExperimentConfig(
        m=args.m, n=args.n, d=args.d, alpha=args.alpha, statistic=_statistic(args),
        data_law=DataLaw.GAUSSIAN if args.data == "gaussian" else DataLaw.HEAVY,
        estimator=Estimator(args.estimator), reps=args.reps, master_seed=args.seed,
    )
    row = run_experiment(config, workers=args.threads)
    print(json.dumps(row.to_csv_row()))
    return 0


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.config, {"reps": args.reps, "master_seed": args.seed})
    result = run_sweep(spec, workers=args.threads)
    if args.out_csv:
        write_csv(result, args.out_csv)
    if args.out_json:
        write_json(result, args.out_json)
    if not (args.out_csv or args.out_json):
        print(json.dumps(sweep_to_json(result), indent=2))
    for row in result.rows:
        if row.error:
            print(f"cell n={row.config.n} d={row.config.d} failed: {row.error}", file=sys.stderr)
    return 0 if result.ok else 1


def cmd_bounds(args) -> int:
    dist = HeavyTailDistribution(args.m)
    stat = _statistic(args)
    c = gx.max_critical_exact(args.d, args.alpha, stat).value
    out = {"m": args.m, "n": args.n, "d": args.d, "alpha": args.alpha, "critical_value": c,
           "phase_threshold": phase_threshold(args.n, args.m)}
    try:
        nb = nagaev_size_lower_bound(dist, args.n, args.d, c, stat is gx.Statistic.TWO_SIDED)
        out.update(nagaev_bound=nb.bound, per_column_term=nb.per_column_term,
                   clamped=nb.clamped, asymptotic_only=nb.asymptotic_only)
    except DomainError as exc:
        out.update(nagaev_bound=None, nagaev_error=str(exc))
    if args.n >= 2:
        r = classify_regime(args.n, args.d, args.m)
        out.update(regime=r.regime.value, log_ratio=r.log_ratio,
                   epsilon_equivalent=r.epsilon_equivalent)
    print(json.dumps(out))
    return 0


def cmd_selftest(args) -> int:
    report = self_test(args.m)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(f"m={report.m} sigma={report.sigma:.12g} (1+2m)/sigma^m={report.mth_moment_P:.12g}")
        for c in report.checks:
            flag = "PASS" if c.passed else "FAIL"
            print(f"{flag}  {c.name:<28} deviation={c.deviation:.3e}  tol={c.tolerance:.1e}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hdphase", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("critval", help="Gaussian max critical value")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--two-sided", action="store_true")
    s.add_argument("--asymptotic", action="store_true")
    s.set_defaults(func=cmd_critval)

    s = sub.add_parser("moments", help="sigma_m^2 and the m-th moment identity")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("sample", help="draws from the unit-variance heavy-tailed law")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("size", help="Monte Carlo size of the max test")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--reps", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--estimator", choices=[e.value for e in Estimator], default="column-power")
    s.add_argument("--two-sided", action="store_true")
    s.add_argument("--data", choices=["gaussian", "heavy"], default="heavy")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_size)

    s = sub.add_parser("sweep", help="run a growth-rate sweep from a YAML config")
    s.add_argument("--config", required=True)
    s.add_argument("--out-csv")
    s.add_argument("--out-json")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--reps", type=int, help="override reps from the config file")
    s.add_argument("--seed", type=int, help="override master_seed from the config file")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("bounds", help="Nagaev lower bound, regime and phase threshold")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--two-sided", action="store_true")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("selftest", help="run the identity checks")
    s.add_argument("--json", action="store_true")
    s.add_argument("--m", type=float, default=2.5)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, BudgetExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
