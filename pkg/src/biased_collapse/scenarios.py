"""Worked examples: the two-lab correlated state and its signaling gap, and
two-qubit models of three retroactive-influence experiments.

All three experiment models use the same structure: an earlier record qubit
perfectly correlated with a later "valence" qubit, and nature answering the
valence question with a weighted Born rule favouring the positive answer.
The record, read afterwards with ordinary chance, inherits the bias.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .errors import NonCommutingError, UnknownSettingError, ZeroTraceError
from .kernel import (
    DEFAULT_TOL,
    ZERO_PROB,
    DensityMatrix,
    EventLog,
    Outcome,
    Projector,
    born_probability,
    complement,
    luders_update,
    pose_question,
    validate_density,
    validate_projector,
)
from .policy import Biased, ChoicePolicy, Deterministic, Orthodox, make_rng

BASE_RT_MS = 700.0


def local_qubit_projector(op, site: int, n_qubits: int = 2) -> Projector:
    return validate_projector(linalg.embed(op, site, [2] * n_qubits))


def _commute_or_raise(p: Projector, q: Projector, tol: float = DEFAULT_TOL) -> None:
    if linalg.commutator_norm(p.mat, q.mat) > tol:
        raise NonCommutingError("projectors do not commute")


def build_correlated_state(p: Projector, q: Projector) -> DensityMatrix:
    """Normalized (PQ' + P'Q): Yes on ``p`` always pairs with No on ``q``."""
    _commute_or_raise(p, q)
    m = p.mat @ complement(q).mat + complement(p).mat @ q.mat
    norm = linalg.trace(m).real
    if norm < ZERO_PROB:
        raise ZeroTraceError("PQ' + P'Q has zero trace")
    return validate_density(m / norm)


# -- two labs -----------------------------------------------------------------


@dataclass(frozen=True)
class TwoLabScenario:
    state: DensityMatrix
    local_p: Projector
    remote_settings: tuple  # of (label, Projector | None)
    policy: ChoicePolicy = field(default_factory=Orthodox)

    def __post_init__(self):
        object.__setattr__(self, "remote_settings", tuple(self.remote_settings))
        for _, q in self.remote_settings:
            if q is not None:
                _commute_or_raise(self.local_p, q)

    def setting(self, label) -> Optional[Projector]:
        for name, q in self.remote_settings:
            if name == label:
                return q
        raise UnknownSettingError(label)


def remote_marginal(s: TwoLabScenario, setting_label) -> float:
    """Probability of Yes on the local question once the remote lab has posed
    ``setting_label`` and nature has answered it under ``s.policy``,
    averaged over the remote answers."""
    q = s.setting(setting_label)
    if q is None:
        return born_probability(s.state, s.local_p)
    p_yes, p_no = s.policy.distribution(s.state, q)
    total = 0.0
    for outcome, weight in ((Outcome.YES, p_yes), (Outcome.NO, p_no)):
        if weight == 0.0:
            continue
        born = born_probability(s.state, q if outcome is Outcome.YES else complement(q))
        if born < ZERO_PROB:
            continue
        total += weight * born_probability(luders_update(s.state, q, outcome), s.local_p)
    return total


def signaling_gap(s: TwoLabScenario) -> float:
    """Largest change in the local marginal across remote settings."""
    if len(s.remote_settings) < 2:
        raise ValueError("signaling_gap needs at least two remote settings")
    values = [remote_marginal(s, label) for label, _ in s.remote_settings]
    return max(values) - min(values)


def record_correlation(
    state: DensityMatrix, record_p: Projector, experience_q: Projector, policy: ChoicePolicy
) -> tuple[float, float]:
    """(probability of the favoured experience, probability the record
    later reads Yes)."""
    scenario = TwoLabScenario(state, record_p, (("experience", experience_q),), policy)
    experience_prob, _ = policy.distribution(state, experience_q)
    return experience_prob, remote_marginal(scenario, "experience")


# -- experiment models --------------------------------------------------------


class Experiment(str, enum.Enum):
    FEELING_FUTURE = "feeling_future"
    AVOIDANCE = "avoidance"
    PRIMING = "priming"


@dataclass(frozen=True)
class BemTrialSpec:
    experiment: Experiment
    weight: float = 1.0
    n_trials: int = 10_000
    rt_gap: float = 0.0
    seed: int = 0
    # nature always picks the favoured answer (the weight -> infinity limit)
    deterministic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "experiment", Experiment(self.experiment))
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ValueError(f"weight must be positive and finite, got {self.weight!r}")
        if int(self.n_trials) < 1:
            raise ValueError("n_trials must be >= 1")
        if not (math.isfinite(self.rt_gap) and self.rt_gap >= 0):
            raise ValueError("rt_gap must be finite and >= 0")

    @property
    def policy(self) -> ChoicePolicy:
        if self.deterministic:
            return Deterministic(Outcome.YES)
        return Biased(self.weight, 1.0)


@dataclass(frozen=True)
class ReportRow:
    label: str
    analytic: float
    empirical: float
    stderr: float
    n: int
    is_probability: bool = True


@dataclass(frozen=True)
class ScenarioReport:
    rows: tuple
    n_trials: int
    seed: int

    @property
    def analytic(self) -> dict:
        return {r.label: r.analytic for r in self.rows}

    @property
    def empirical(self) -> dict:
        return {r.label: r.empirical for r in self.rows}

    @property
    def stderr(self) -> dict:
        return {r.label: r.stderr for r in self.rows}


def binomial_stderr(p_hat: float, n: int) -> float:
    return math.sqrt(p_hat * (1.0 - p_hat) / n)


def _probability_row(label: str, analytic: float, hits: int, n: int) -> ReportRow:
    p_hat = hits / n
    return ReportRow(label, analytic, p_hat, binomial_stderr(p_hat, n), n)


def _correlated_pair() -> tuple[Projector, Projector, DensityMatrix]:
    """Record question on qubit 0, valence question on qubit 1, in the state
    (|00><00| + |11><11|)/2 so the two always agree."""
    record = local_qubit_projector(linalg.basis_projector(0), 0)
    valence = local_qubit_projector(linalg.basis_projector(0), 1)
    # PQ' + P'Q with Q the negative answer, i.e. record Yes pairs with positive
    state = build_correlated_state(record, complement(valence))
    return record, valence, state


def _run_trials(state, first_q, first_policy, second_q, n, rng) -> tuple[int, int]:
    """Pose ``first_q`` under ``first_policy`` then ``second_q`` with ordinary
    chance on a fresh copy of ``state`` each trial; count Yes answers."""
    first_hits = second_hits = 0
    orthodox = Orthodox()
    fresh = EventLog(state)
    for _ in range(n):
        a, log = pose_question(fresh, first_q, first_policy, rng)
        b, _ = pose_question(log, second_q, orthodox, rng)
        first_hits += a is Outcome.YES
        second_hits += b is Outcome.YES
    return first_hits, second_hits


def bem_feeling_future(spec: BemTrialSpec) -> ScenarioReport:
    """Experience qubit (|0> erotic picture seen, |1> nothing seen) times
    record qubit (|0> picture placed right, |1> left), in the state
    (Q_ER P_ER + Q_OR P_EL) normalized."""
    q_er = local_qubit_projector(linalg.basis_projector(0), 0)
    q_or = local_qubit_projector(linalg.basis_projector(1), 0)
    p_er = local_qubit_projector(linalg.basis_projector(0), 1)
    p_el = local_qubit_projector(linalg.basis_projector(1), 1)
    m = q_er.mat @ p_er.mat + q_or.mat @ p_el.mat
    state = validate_density(m / linalg.trace(m).real)

    policy = spec.policy
    experience, record = record_correlation(state, p_er, q_er, policy)
    rng = make_rng(spec.seed)
    n = int(spec.n_trials)
    exp_hits, rec_hits = _run_trials(state, q_er, policy, p_er, n, rng)
    rows = (
        _probability_row("experience_er", experience, exp_hits, n),
        _probability_row("record_er", record, rec_hits, n),
    )
    return ScenarioReport(rows, n, spec.seed)


def bem_avoidance(spec: BemTrialSpec) -> ScenarioReport:
    """Qubit 0 records whether the earlier-preferred picture is the one later
    made target; qubit 1 is the stimulus valence (|0> positive). A positive
    stimulus goes with a hit, so favouring it raises the hit rate."""
    hit, positive, state = _correlated_pair()
    policy = spec.policy
    stim_prob, hit_prob = record_correlation(state, hit, positive, policy)
    n = int(spec.n_trials)
    pos_hits, hits = _run_trials(state, positive, policy, hit, n, make_rng(spec.seed))
    rows = (
        _probability_row("positive_stimulus", stim_prob, pos_hits, n),
        _probability_row("hit_rate", hit_prob, hits, n),
    )
    return ScenarioReport(rows, n, spec.seed)


def bem_priming(spec: BemTrialSpec) -> ScenarioReport:
    """Qubit 0 records a fast (|0>) or slow (|1>) response; qubit 1 is the
    later word's congruence (|0> congruent). Response time is
    700 ms -/+ rt_gap/2. The reported RT difference is the incongruent minus
    congruent contrast measured against the balanced null, i.e. the mean of
    2*(700 - RT) over trials, whose expectation is rt_gap*(2p - 1) with p the
    probability of a congruent word."""
    fast, congruent, state = _correlated_pair()
    policy = spec.policy
    p_congruent, p_fast = record_correlation(state, fast, congruent, policy)
    n = int(spec.n_trials)
    cong_hits, fast_hits = _run_trials(state, congruent, policy, fast, n, make_rng(spec.seed))

    gap = float(spec.rt_gap)
    p_hat = fast_hits / n
    rt_fast, rt_slow = BASE_RT_MS - gap / 2, BASE_RT_MS + gap / 2
    mean_rt = p_hat * rt_fast + (1 - p_hat) * rt_slow
    rows = (
        _probability_row("congruent_word", p_congruent, cong_hits, n),
        _probability_row("fast_response", p_fast, fast_hits, n),
        ReportRow(
            "rt_difference_ms",
            gap * (2 * p_fast - 1),
            2 * (BASE_RT_MS - mean_rt),
            2 * gap * binomial_stderr(p_hat, n),
            n,
            is_probability=False,
        ),
    )
    return ScenarioReport(rows, n, spec.seed)


def run_bem(spec: BemTrialSpec) -> ScenarioReport:
    return {
        Experiment.FEELING_FUTURE: bem_feeling_future,
        Experiment.AVOIDANCE: bem_avoidance,
        Experiment.PRIMING: bem_priming,
    }[spec.experiment](spec)


# -- two-lab defaults ---------------------------------------------------------


def standard_two_lab(policy: ChoicePolicy = Orthodox()) -> TwoLabScenario:
    """Correlated two-qubit state with P = |0><0| on lab A, remote settings
    Q = |0><0| and Q1 = |+><+| on lab B, plus no measurement."""
    p = local_qubit_projector(linalg.basis_projector(0), 0)
    q = local_qubit_projector(linalg.basis_projector(0), 1)
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    q1 = local_qubit_projector(linalg.outer(plus), 1)
    state = build_correlated_state(p, q)
    return TwoLabScenario(state, p, (("Q", q), ("Q1", q1), ("None", None)), policy)


def simulate_two_lab(s: TwoLabScenario, n: int, seed: int) -> ScenarioReport:
    """Sample the remote question under the policy then the local question by
    chance; report per-setting local Yes frequencies and the gap."""
    rng = make_rng(seed)
    rows = []
    for label, q in s.remote_settings:
        log0 = EventLog(s.state)
        hits = 0
        for _ in range(n):
            log = log0
            if q is not None:
                _, log = pose_question(log, q, s.policy, rng)
            a, _ = pose_question(log, s.local_p, Orthodox(), rng)
            hits += a is Outcome.YES
        rows.append(_probability_row(f"marginal[{label}]", remote_marginal(s, label), hits, n))
    if len(rows) >= 2:
        hi = max(rows, key=lambda r: r.empirical)
        lo = min(rows, key=lambda r: r.empirical)
        rows.append(
            ReportRow(
                "signaling_gap",
                signaling_gap(s),
                hi.empirical - lo.empirical,
                math.hypot(hi.stderr, lo.stderr),
                n,
                is_probability=False,
            )
        )
    return ScenarioReport(tuple(rows), n, seed)
