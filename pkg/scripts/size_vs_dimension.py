"""Size of the Gaussian-calibrated max test as d grows at fixed n.

Alongside each Monte Carlo estimate it prints the Nagaev lower bound and the
one-big-jump approximation 1 - exp(-d n (1 - F(c sqrt n))) as reference curves.

    python scripts/size_vs_dimension.py --m 2.5 --n 100 --reps 1000000
"""

import argparse
import math

from hdphase.monte_carlo import ExperimentConfig, simulate
from hdphase.theory_bounds import nagaev_size_lower_bound, phase_threshold


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=float, default=2.5)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--reps", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--dims", type=int, nargs="+", default=[10**k for k in range(1, 7)])
    args = ap.parse_args()

    print(f"phase threshold n^(m/2-1) = {phase_threshold(args.n, args.m):.3f}")
    print(f"{'d':>9} {'p_hat':>8} {'se':>8} {'one-jump':>9} {'nagaev':>8}")
    for d in args.dims:
        cfg = ExperimentConfig(m=args.m, n=args.n, d=d, alpha=args.alpha, reps=args.reps,
                               master_seed=args.seed)
        est = simulate(cfg, workers=args.threads)
        dist = cfg.distribution()
        t = est.threshold
        one_jump = -math.expm1(-d * args.n * dist.sf(t * math.sqrt(args.n)))
        bound = nagaev_size_lower_bound(dist, args.n, d, t).bound
        print(f"{d:>9} {est.p_hat:8.4f} {est.std_err:8.4f} {one_jump:9.4f} {bound:8.4f}")


if __name__ == "__main__":
    main()
