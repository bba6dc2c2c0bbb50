"""Invariant battery behind ``biased-collapse verify``.

Each check returns a :class:`CheckResult`; the residual is compared with a
bound taken from :class:`Tolerances`. Setting a bound to zero makes any
floating-point residual fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .kernel import (
    EventLog,
    Outcome,
    born_probability,
    complement,
    effective_history,
    forward_evolve,
    luders_update,
    pose_question,
    validate_density,
    validate_projector,
)
from .policy import (
    Deterministic,
    Orthodox,
    biased_conditional_expectation,
    haar_unitaries,
    make_rng,
    sample_haar_unitary,
    sample_outcome,
    twirl_estimate,
    unknown_reason_expectation,
)
from .scenarios import (
    BemTrialSpec,
    TwoLabScenario,
    build_correlated_state,
    local_qubit_projector,
    run_bem,
    signaling_gap,
)


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-12
    monte_carlo: float = 0.02
    sigmas: float = 4.0
    instances: int = 100
    twirl_samples: int = 20_000
    bem_trials: int = 10_000

    @classmethod
    def uniform(cls, value: float) -> "Tolerances":
        return cls(exact=value, monte_carlo=value, sigmas=value)


@dataclass(frozen=True)
class CheckResult:
    name: str
    bound: float
    residual: float
    stderr: float
    n: int

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.bound


# -- random instances ---------------------------------------------------------


def random_density(dim: int, rng, rank: int | None = None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return validate_density(m / np.trace(m).real)


def random_qubit_projector(rng):
    """Rank-1 projector onto a Haar-random qubit state."""
    v = haar_unitaries(2, 1, rng)[0][:, 0]
    return linalg.outer(v)


def random_local_pair(rng):
    p = local_qubit_projector(random_qubit_projector(rng), 0)
    q = local_qubit_projector(random_qubit_projector(rng), 1)
    return p, q


def random_product_state(rng):
    return validate_density(linalg.tensor_product(random_density(2, rng).mat, random_density(2, rng).mat))


# -- checks -------------------------------------------------------------------


def check_no_signaling(tol: Tolerances, seed: int) -> CheckResult:
    rng = make_rng(seed, 1)
    worst = 0.0
    for _ in range(tol.instances):
        rho = random_density(4, rng)
        p, q = random_local_pair(rng)
        s = TwoLabScenario(rho, p, (("Q", q), ("None", None)), Orthodox())
        worst = max(worst, signaling_gap(s))
    return CheckResult("no_signaling_orthodox", tol.exact, worst, 0.0, tol.instances)


def check_extreme_bias(tol: Tolerances, seed: int) -> CheckResult:
    p = local_qubit_projector(linalg.basis_projector(0), 0)
    q = local_qubit_projector(linalg.basis_projector(0), 1)
    rho = build_correlated_state(p, q)
    biased = biased_conditional_expectation(rho, p, q)
    plain = born_probability(rho, p)
    gap = signaling_gap(TwoLabScenario(rho, p, (("Q", q), ("None", None)), Deterministic()))
    residual = max(abs(biased), abs(plain - 0.5), abs(gap - 0.5))
    return CheckResult("extreme_bias_signaling", tol.exact, residual, 0.0, 1)


def check_product_no_signal(tol: Tolerances, seed: int) -> CheckResult:
    rng = make_rng(seed, 2)
    worst = 0.0
    for _ in range(tol.instances):
        rho = random_product_state(rng)
        p, q = random_local_pair(rng)
        s = TwoLabScenario(rho, p, (("Q", q), ("None", None)), Deterministic())
        worst = max(worst, signaling_gap(s))
    return CheckResult("product_state_no_signal", tol.exact, worst, 0.0, tol.instances)


def check_measurement_calculus(tol: Tolerances, seed: int) -> list[CheckResult]:
    rng = make_rng(seed, 3)
    repeat = complete = invalid = 0.0
    for _ in range(tol.instances):
        rho = random_density(4, rng)
        p = validate_projector(linalg.outer(haar_unitaries(4, 1, rng)[0][:, 0]))
        complete = max(complete, abs(born_probability(rho, p) + born_probability(rho, complement(p)) - 1))
        for outcome in Outcome:
            post = luders_update(rho, p, outcome)
            invalid = max(invalid, abs(np.trace(post.mat).real - 1))
            if outcome is Outcome.YES:
                repeat = max(repeat, abs(born_probability(post, p) - 1))
    n = tol.instances
    return [
        CheckResult("repeatability", tol.exact, repeat, 0.0, n),
        CheckResult("complement_completeness", tol.exact, complete, 0.0, n),
        CheckResult("luders_normalization", tol.exact, invalid, 0.0, n),
    ]


def check_effective_history(tol: Tolerances, seed: int) -> list[CheckResult]:
    rng = make_rng(seed, 4)
    p = local_qubit_projector(linalg.basis_projector(0), 0)
    q = local_qubit_projector(linalg.basis_projector(0), 1)
    rho = build_correlated_state(p, q)

    log = EventLog(rho)
    for _ in range(3):
        u = sample_haar_unitary(4, rng)
        _, log = pose_question(log, p, Orthodox(), rng, pre_unitary=u)
    past = effective_history(log, 0)
    round_trip = linalg.frobenius_distance(forward_evolve(log, past, 0).mat, log.current_state.mat)

    _, plain = pose_question(EventLog(rho), p, Deterministic(), rng)
    target = linalg.basis_projector(1, 4)  # |01><01|
    eff = effective_history(plain, 0).mat
    shift = abs(linalg.frobenius_distance(eff, rho.mat) - 1 / math.sqrt(2))
    residual = max(linalg.frobenius_distance(eff, target), shift)
    return [
        CheckResult("effective_history_round_trip", tol.exact, round_trip, 0.0, 3),
        CheckResult("effective_past_after_collapse", tol.exact, residual, 0.0, 1),
    ]


def check_twirl(tol: Tolerances, seed: int) -> list[CheckResult]:
    results = []
    for dim in (2, 4):
        rng = make_rng(seed, 10 + dim)
        q = validate_projector(linalg.basis_projector(0, dim))
        err = linalg.frobenius_distance(twirl_estimate(q, tol.twirl_samples, rng), np.eye(dim) / dim)
        results.append(CheckResult(f"twirl_dim{dim}", tol.monte_carlo, err, 0.0, tol.twirl_samples))

    rng = make_rng(seed, 20)
    p = local_qubit_projector(linalg.basis_projector(0), 0)
    q = local_qubit_projector(linalg.basis_projector(0), 1)
    rho = build_correlated_state(p, q)
    est = unknown_reason_expectation(rho, p, q, tol.twirl_samples, rng)
    results.append(
        CheckResult("unknown_reason_expectation", tol.monte_carlo, abs(est - born_probability(rho, p)), 0.0, tol.twirl_samples)
    )
    return results


def check_sampling(tol: Tolerances, seed: int) -> CheckResult:
    n = 100_000
    rng = make_rng(seed, 5)
    rho = validate_density(np.eye(2) / 2)
    p = validate_projector(linalg.basis_projector(0))
    policy = Orthodox()
    hits = sum(sample_outcome(policy, rho, p, rng) is Outcome.YES for _ in range(n))
    se = math.sqrt(0.25 / n)
    return CheckResult("orthodox_sampling", tol.sigmas * se, abs(hits / n - 0.5), se, n)


def check_bem_nulls(tol: Tolerances, seed: int) -> CheckResult:
    """Residual is the largest empirical deviation from the null in standard
    errors; an analytic value off the null is an outright failure."""
    worst = 0.0
    for experiment in ("feeling_future", "avoidance", "priming"):
        spec = BemTrialSpec(experiment, weight=1.0, n_trials=tol.bem_trials, rt_gap=40.0, seed=seed)
        for row in run_bem(spec).rows:
            null = 0.5 if row.is_probability else 0.0
            if abs(row.analytic - null) > tol.exact:
                return CheckResult("bem_null_results", tol.sigmas, math.inf, row.stderr, row.n)
            if row.stderr > 0:
                worst = max(worst, abs(row.empirical - null) / row.stderr)
    return CheckResult("bem_null_results", tol.sigmas, worst, 0.0, tol.bem_trials)


def run_all(tol: Tolerances = Tolerances(), seed: int = 0) -> list[CheckResult]:
    results = [check_no_signaling(tol, seed), check_extreme_bias(tol, seed), check_product_no_signal(tol, seed)]
    results += check_measurement_calculus(tol, seed)
    results += check_effective_history(tol, seed)
    results += check_twirl(tol, seed)
    results.append(check_sampling(tol, seed))
    results.append(check_bem_nulls(tol, seed))
    return results
