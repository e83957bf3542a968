"""Run a growth-rate sweep and write phase-diagram data (CSV + JSON).

    python scripts/phase_diagram.py configs/phase_m3.yaml --out results/phase_m3

Prints a compact table of size and GAE per (n, exponent) cell.
"""

import argparse
from pathlib import Path

from hdphase.runner import load_sweep_spec, run_sweep, write_csv, write_json


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default=None, help="output prefix (default: results/<config stem>)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--reps", type=int)
    args = ap.parse_args()

    spec = load_sweep_spec(args.config, {"reps": args.reps})
    result = run_sweep(spec, workers=args.threads)

    prefix = Path(args.out or Path("results") / Path(args.config).stem)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_csv(result, prefix.with_suffix(".csv"))
    write_json(result, prefix.with_suffix(".json"))

    print(f"critical exponent m/2 - 1 = {spec.m / 2 - 1:g}")
    print(f"{'n':>6} {'exponent':>8} {'d':>9} {'regime':>14} {'p_hat':>8} {'se':>8} {'gae':>8}")
    for row in result.rows:
        if row.error:
            print(f"{row.config.n:>6} {row.exponent:>8g} {row.config.d:>9}  error: {row.error}")
            continue
        est = row.estimate
        print(f"{row.config.n:>6} {row.exponent:>8g} {row.config.d:>9} {row.regime.regime.value:>14} "
              f"{est.p_hat:8.4f} {est.std_err:8.4f} {row.gae:8.4f}")
    print(f"wrote {prefix.with_suffix('.csv')} and {prefix.with_suffix('.json')}")


if __name__ == "__main__":
    main()
