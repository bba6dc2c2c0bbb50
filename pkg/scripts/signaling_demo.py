"""Local marginal on the correlated two-qubit state as the remote policy
moves from ordinary chance to a fixed answer.

    python scripts/signaling_demo.py
"""

from biased_collapse.policy import Biased, Deterministic, Orthodox
from biased_collapse.scenarios import remote_marginal, signaling_gap, standard_two_lab

policies = [("orthodox", Orthodox())]
policies += [(f"biased w={w:g}", Biased(w, 1.0)) for w in (1.5, 3.0, 10.0, 100.0)]
policies += [("deterministic yes", Deterministic())]

print(f"{'policy':<20} {'Q':>8} {'Q1':>8} {'None':>8} {'gap':>8}")
for name, policy in policies:
    s = standard_two_lab(policy)
    marginals = [remote_marginal(s, label) for label, _ in s.remote_settings]
    print(f"{name:<20} " + " ".join(f"{m:8.4f}" for m in marginals) + f" {signaling_gap(s):8.4f}")
