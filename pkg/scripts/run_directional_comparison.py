#!/usr/bin/env python3
"""Compare the correlation-aware mechanism against plain randomized response.

Runs the full experiment harness on strongly correlated synthetic data and
prints, per privacy budget, the attacker's estimation error (higher = more
privacy retained under attack) and the beacon-style query accuracy (higher =
more utility) for both mechanisms, with 95% confidence intervals over seeds.
The correlation-aware mechanism should win on both axes at every budget.
"""

import argparse
import math
import statistics
import sys
import time

from corrldp.data import SyntheticSpec
from corrldp.experiments import ExperimentConfig, OrderStrategy, run_experiment, write_results
from corrldp.mechanism import SharingMode


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=50, help="seeds per budget (default 50)")
    parser.add_argument("--epsilon-grid", default="0.4,0.8,1.2,1.6,2.0",
                        help="comma-separated privacy budgets")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    parser.add_argument("--out", default=None,
                        help="optional directory for detail.csv / summary.csv")
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv if argv is not None else sys.argv[1:])
    grid = tuple(float(tok) for tok in args.epsilon_grid.split(","))
    # 150 individuals, 200 SNPs: positions 1..149 form one strongly chained
    # block (rho 0.999); positions 150..199 are near-monomorphic rare variants.
    maf = tuple(0.3 if t < 150 else 0.0005 for t in range(200))
    rho = tuple(0.999 if 0 < t < 150 else 0.0 for t in range(200))
    config = ExperimentConfig(
        epsilon_grid=grid,
        trials=args.trials,
        seed=args.seed,
        synthetic=SyntheticSpec(n=150, l=200, maf=maf, rho=rho),
        tau_hat=0.15,
        gamma_hat=0.01,
        mode=SharingMode.BEACON,
        tau=0.15,
        gamma=0.5,
        attacker_knows_mechanism=False,
        order_strategy=OrderStrategy.RANDOM,
        include_postprocess=False,
    )
    started = time.perf_counter()
    result = run_experiment(config, jobs=args.jobs)
    print(f"ran {len(result.results)} trials in {time.perf_counter() - started:.0f}s")
    if args.out is not None:
        detail, summary = write_results(result, args.out)
        print(f"wrote {detail}")
        print(f"wrote {summary}")

    def mean_ci(name, eps):
        vals = [r.metrics[name] for r in result.results if r.epsilon == eps]
        if len(vals) < 2:
            return statistics.fmean(vals), float("nan")
        return statistics.fmean(vals), 1.96 * statistics.stdev(vals) / math.sqrt(len(vals))

    header = (f"{'eps':>5}  {'E(rr|attack)':>16}  {'E(prop|attack)':>16}  {'privacy':>8}  "
              f"{'A(rr)':>16}  {'A(prop)':>16}  {'utility':>8}")
    print(header)
    for eps in grid:
        e_rr, e_rr_ci = mean_ci("e_rr_attack", eps)
        e_pr, e_pr_ci = mean_ci("e_prop_attack", eps)
        a_rr, a_rr_ci = mean_ci("a_rr", eps)
        a_pr, a_pr_ci = mean_ci("a_prop", eps)
        privacy = "WIN" if e_pr - e_pr_ci > e_rr + e_rr_ci else "overlap"
        utility = "WIN" if a_pr - a_pr_ci > a_rr + a_rr_ci else "overlap"
        print(f"{eps:>5.2f}  {e_rr:>8.4f}+/-{e_rr_ci:.4f}  {e_pr:>8.4f}+/-{e_pr_ci:.4f}  "
              f"{privacy:>8}  {a_rr:>8.4f}+/-{a_rr_ci:.4f}  {a_pr:>8.4f}+/-{a_pr_ci:.4f}  "
              f"{utility:>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
