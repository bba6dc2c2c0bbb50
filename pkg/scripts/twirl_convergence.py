"""Frobenius error of the Haar twirl of a rank-1 projector against I/dim
on a doubling ladder of sample counts, averaged over seeds.

    python scripts/twirl_convergence.py --dim 4
"""

import argparse

import numpy as np

from biased_collapse import linalg
from biased_collapse.kernel import validate_projector
from biased_collapse.policy import make_rng, twirl_estimate

parser = argparse.ArgumentParser()
parser.add_argument("--dim", type=int, default=2)
parser.add_argument("--seeds", type=int, default=5)
args = parser.parse_args()

q = validate_projector(linalg.basis_projector(0, args.dim))
target = np.eye(args.dim) / args.dim
print(f"{'N':>7} {'mean error':>11} {'error*sqrt(N)':>14}")
for n in (250, 1000, 4000, 16000, 64000):
    errs = [linalg.frobenius_distance(twirl_estimate(q, n, make_rng(s, n)), target) for s in range(args.seeds)]
    print(f"{n:>7} {np.mean(errs):11.5f} {np.mean(errs) * np.sqrt(n):14.4f}")
