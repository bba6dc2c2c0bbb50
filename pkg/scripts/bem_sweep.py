"""Sweep the valence weight for the three experiment models and print
analytic vs simulated values.

    python scripts/bem_sweep.py --trials 5000 --seed 1
"""

import argparse

from biased_collapse.scenarios import BemTrialSpec, run_bem

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=5000)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--rt-gap", type=float, default=40.0)
args = parser.parse_args()

for experiment in ("feeling_future", "avoidance", "priming"):
    print(f"\n{experiment}")
    for w in (1.0, 1.5, 2.0, 3.0, 10.0):
        spec = BemTrialSpec(experiment, weight=w, n_trials=args.trials, rt_gap=args.rt_gap, seed=args.seed)
        report = run_bem(spec)
        cells = [f"{r.label}={r.analytic:.3f}/{r.empirical:.3f}+-{r.stderr:.3f}" for r in report.rows]
        print(f"  w={w:<5g} " + "  ".join(cells))
