"""Acceptance criteria, one test each. Every test records a PASS/FAIL line
that is printed in the terminal summary."""

import json
import math
import time

import numpy as np
import pytest

from biased_collapse import linalg
from biased_collapse.cli import main
from biased_collapse.kernel import (
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
from biased_collapse.policy import (
    Deterministic,
    Orthodox,
    biased_conditional_expectation,
    make_rng,
    sample_haar_unitary,
    sample_outcome,
    twirl_estimate,
    unknown_reason_expectation,
)
from biased_collapse.scenarios import (
    BemTrialSpec,
    TwoLabScenario,
    bem_avoidance,
    bem_feeling_future,
    bem_priming,
    build_correlated_state,
    local_qubit_projector,
    remote_marginal,
    signaling_gap,
)

from conftest import ACCEPTANCE_LINES

EXACT = 1e-12
SIGMAS = 4.0
TIME_LIMIT_S = 10.0


@pytest.fixture
def criterion(request):
    """Yields a dict for the test to fill with ``ok`` and ``detail``; records
    the verdict and enforces the per-criterion time limit."""
    state = {"ok": False, "detail": ""}
    start = time.perf_counter()
    yield state
    elapsed = time.perf_counter() - start
    ok = state["ok"] and elapsed < TIME_LIMIT_S
    ACCEPTANCE_LINES.append(
        f"{'PASS' if ok else 'FAIL'}  {request.node.name:<42} {state['detail']}  ({elapsed:.2f}s)"
    )
    assert elapsed < TIME_LIMIT_S, f"took {elapsed:.1f}s"


def qubit_pair():
    p = local_qubit_projector(linalg.basis_projector(0), 0)
    q = local_qubit_projector(linalg.basis_projector(0), 1)
    return p, q, build_correlated_state(p, q)


def random_state(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return validate_density(m / np.trace(m).real)


def random_local(rng, site):
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return local_qubit_projector(linalg.outer(v / np.linalg.norm(v)), site)


def test_c01_no_signaling_orthodox(criterion):
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        rho = random_state(rng, 4)
        p, q = random_local(rng, 0), random_local(rng, 1)
        s = TwoLabScenario(rho, p, (("Q", q), ("None", None)), Orthodox())
        worst = max(worst, abs(remote_marginal(s, "Q") - born_probability(rho, p)))
    criterion["detail"] = f"max |<P>_YQ - <P>_Y| = {worst:.2e} (tol {EXACT})"
    criterion["ok"] = worst <= EXACT
    assert criterion["ok"]


def test_c02_extreme_bias_example(criterion):
    p, q, rho = qubit_pair()
    biased = biased_conditional_expectation(rho, p, q)
    plain = born_probability(rho, p)
    criterion["detail"] = f"biased = {biased:.3g}, unconditioned = {plain:.15g}"
    criterion["ok"] = abs(biased) <= EXACT and abs(plain - 0.5) <= EXACT
    assert criterion["ok"]


def test_c03_signaling_gap(criterion):
    p, q, rho = qubit_pair()
    gap = signaling_gap(TwoLabScenario(rho, p, (("Q", q), ("None", None)), Deterministic()))
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(50):
        prod = validate_density(np.kron(random_state(rng, 2).mat, random_state(rng, 2).mat))
        pp, qq = random_local(rng, 0), random_local(rng, 1)
        worst = max(worst, signaling_gap(TwoLabScenario(prod, pp, (("Q", qq), ("None", None)), Deterministic())))
    criterion["detail"] = f"gap = {gap:.15g}, product max gap = {worst:.2e}"
    criterion["ok"] = abs(gap - 0.5) <= EXACT and worst <= EXACT
    assert criterion["ok"]


def test_c04_haar_twirl(criterion):
    errors = []
    for dim in (2, 4):
        q = validate_projector(linalg.basis_projector(0, dim))
        target = np.eye(dim) * q.rank / dim
        for seed in range(5):
            est = twirl_estimate(q, 20_000, make_rng(seed, dim))
            errors.append(linalg.frobenius_distance(est, target))
    p, q, rho = qubit_pair()
    born = born_probability(rho, p)
    exp_err = max(abs(unknown_reason_expectation(rho, p, q, 20_000, make_rng(seed, 99)) - born) for seed in range(5))
    criterion["detail"] = f"max twirl error = {max(errors):.4f}, max expectation error = {exp_err:.4f} (tol 0.02)"
    criterion["ok"] = max(errors) <= 0.02 and exp_err <= 0.02
    assert criterion["ok"]


def test_c05_sampling_fidelity(criterion):
    rho = validate_density(np.eye(2) / 2)
    p = validate_projector(linalg.basis_projector(0))
    n = 100_000
    rng = make_rng(505)
    hits = sum(sample_outcome(Orthodox(), rho, p, rng) is Outcome.YES for _ in range(n))
    bound = 4 * math.sqrt(0.25 / n)
    criterion["detail"] = f"frequency = {hits / n:.5f}, |dev| bound {bound:.4f}"
    criterion["ok"] = abs(hits / n - 0.5) <= bound
    assert criterion["ok"]


def _within(row, target, sigmas=SIGMAS):
    return abs(row.empirical - target) <= sigmas * row.stderr


def test_c06_feeling_future(criterion):
    checks = []
    null = bem_feeling_future(BemTrialSpec("feeling_future", weight=1.0, n_trials=10_000, seed=61))
    checks += [r.analytic == 0.5 and _within(r, 0.5) for r in null.rows]
    two = bem_feeling_future(BemTrialSpec("feeling_future", weight=2.0, n_trials=10_000, seed=62))
    checks += [abs(r.analytic - 2 / 3) <= EXACT and _within(r, 2 / 3) for r in two.rows]
    det = bem_feeling_future(BemTrialSpec("feeling_future", n_trials=10_000, seed=63, deterministic=True))
    checks += [r.analytic == 1.0 and r.empirical == 1.0 for r in det.rows]
    criterion["detail"] = (
        f"w=1 {null.empirical['record_er']:.4f}, w=2 {two.empirical['record_er']:.4f}, "
        f"det {det.empirical['record_er']:.1f}"
    )
    criterion["ok"] = all(checks)
    assert criterion["ok"]


def test_c07_avoidance_and_priming(criterion):
    checks = []
    av1 = bem_avoidance(BemTrialSpec("avoidance", weight=1.0, n_trials=10_000, seed=71))
    checks.append(av1.analytic["hit_rate"] == 0.5 and _within(av1.rows[1], 0.5))
    pr1 = bem_priming(BemTrialSpec("priming", weight=1.0, rt_gap=40.0, n_trials=10_000, seed=72))
    rt1 = pr1.rows[2]
    checks.append(rt1.analytic == 0.0 and _within(rt1, 0.0))
    av3 = bem_avoidance(BemTrialSpec("avoidance", weight=3.0, n_trials=10_000, seed=73))
    checks.append(abs(av3.analytic["hit_rate"] - 0.75) <= EXACT and _within(av3.rows[1], 0.75))
    pr3 = bem_priming(BemTrialSpec("priming", weight=3.0, rt_gap=40.0, n_trials=10_000, seed=74))
    rt3 = pr3.rows[2]
    checks.append(abs(rt3.analytic - 20.0) <= EXACT and _within(rt3, 20.0))
    criterion["detail"] = (
        f"hit w=1 {av1.empirical['hit_rate']:.4f}, w=3 {av3.empirical['hit_rate']:.4f}; "
        f"RT diff w=1 {rt1.empirical:.2f} ms, w=3 {rt3.empirical:.2f} ms"
    )
    criterion["ok"] = all(checks)
    assert criterion["ok"]


def test_c08_measurement_calculus(criterion):
    repeat = complete = norm = 0.0
    for seed in range(100):
        rng = np.random.default_rng(800 + seed)
        rho = random_state(rng, 4)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        p = validate_projector(linalg.outer(v / np.linalg.norm(v)))
        complete = max(complete, abs(born_probability(rho, p) + born_probability(rho, complement(p)) - 1))
        post = luders_update(rho, p, Outcome.YES)  # validates the output
        luders_update(rho, p, Outcome.NO)
        norm = max(norm, abs(np.trace(post.mat).real - 1))
        repeat = max(repeat, abs(born_probability(post, p) - 1))
    criterion["detail"] = f"repeat {repeat:.1e}, completeness {complete:.1e}, trace {norm:.1e}"
    criterion["ok"] = max(repeat, complete, norm) <= EXACT
    assert criterion["ok"]


def test_c09_effective_history(criterion):
    p, q, rho = qubit_pair()
    rng = make_rng(909)
    log = EventLog(rho)
    for question in (p, q, p):
        _, log = pose_question(log, question, Orthodox(), rng, pre_unitary=sample_haar_unitary(4, rng))
    back = effective_history(log, 0)
    round_trip = linalg.frobenius_distance(forward_evolve(log, back, 0).mat, log.current_state.mat)

    _, plain = pose_question(EventLog(rho), p, Deterministic(), rng)
    past = effective_history(plain, 0)
    to_target = linalg.frobenius_distance(past.mat, linalg.basis_projector(1, 4))
    shift = linalg.frobenius_distance(past.mat, plain.state_at(0).mat)
    criterion["detail"] = f"round trip {round_trip:.1e}, |past - |01><01|| {to_target:.1e}, shift {shift:.15f}"
    criterion["ok"] = round_trip <= EXACT and to_target <= EXACT and abs(shift - 1 / math.sqrt(2)) <= EXACT
    assert criterion["ok"]


def test_c10_cli_determinism(criterion, tmp_path):
    status = main(["verify", "--seed", "0", "--out", str(tmp_path / "verify.csv")])
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"scenario": {"type": "feeling_future", "weight": 2, "n_trials": 10_000}}))
    bodies = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        main(["run", "--config", str(cfg), "--seed", "42", "--out", str(out)])
        bodies.append(out.read_bytes())
    criterion["detail"] = f"verify exit {status}, identical bodies {bodies[0] == bodies[1]}"
    criterion["ok"] = status == 0 and bodies[0] == bodies[1]
    assert criterion["ok"]
