"""Validated quantum objects and the orthodox measurement calculus.

States, questions and unitary steps are immutable dataclasses wrapping
read-only arrays. A measurement history is an :class:`EventLog`; posing a
question returns a new log instead of mutating the old one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionError,
    InvalidOperatorError,
    StageError,
    ZeroProbabilityError,
)

DEFAULT_TOL = 1e-9
# an outcome less likely than this cannot be conditioned on
ZERO_PROB = 1e-12


class Outcome(str, enum.Enum):
    YES = "yes"
    NO = "no"

    @property
    def flipped(self) -> "Outcome":
        return Outcome.NO if self is Outcome.YES else Outcome.YES


@dataclass(frozen=True)
class DensityMatrix:
    mat: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class Projector:
    mat: np.ndarray
    rank: int

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class UnitaryStep:
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def inverse(self) -> "UnitaryStep":
        return UnitaryStep(linalg.frozen(linalg.adjoint(self.mat)))


def _hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def _square(m) -> np.ndarray:
    m = linalg.as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got {m.shape}")
    if m.shape[0] > linalg.MAX_DIM:
        raise DimensionError(f"dimension {m.shape[0]} exceeds {linalg.MAX_DIM}")
    return m


def validate_density(m, tol: float = DEFAULT_TOL) -> DensityMatrix:
    m = _square(m)
    defect = _hermitian_defect(m)
    if defect > tol:
        raise InvalidOperatorError("not-hermitian", f"max |m - m^dagger| = {defect:.3g}")
    lowest = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
    if lowest < -tol:
        raise InvalidOperatorError("not-positive", f"smallest eigenvalue {lowest:.3g}")
    tr = complex(np.trace(m))
    if abs(tr - 1) > tol:
        raise InvalidOperatorError("trace-not-one", f"trace = {tr:.6g}")
    return DensityMatrix(linalg.frozen(m), tol)


def validate_projector(m, tol: float = DEFAULT_TOL) -> Projector:
    m = _square(m)
    defect = _hermitian_defect(m)
    if defect > tol:
        raise InvalidOperatorError("not-hermitian", f"max |m - m^dagger| = {defect:.3g}")
    idem = float(np.max(np.abs(m @ m - m)))
    if idem > tol:
        raise InvalidOperatorError("not-idempotent", f"max |PP - P| = {idem:.3g}")
    rank = int(round(linalg.trace(m).real))
    return Projector(linalg.frozen(m), rank)


def validate_unitary(m, tol: float = DEFAULT_TOL) -> UnitaryStep:
    m = _square(m)
    err = linalg.frobenius_distance(m.conj().T @ m, linalg.identity(m.shape[0]))
    if err > tol:
        raise InvalidOperatorError("not-unitary", f"|U^dagger U - I| = {err:.3g}")
    return UnitaryStep(linalg.frozen(m))


def pure_state(vector, tol: float = DEFAULT_TOL) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return validate_density(linalg.outer(v), tol)


def complement(p: Projector) -> Projector:
    return Projector(linalg.frozen(linalg.identity(p.dim) - p.mat), p.dim - p.rank)


def _check_dims(rho: DensityMatrix, p: Projector) -> None:
    if rho.dim != p.dim:
        raise DimensionError(f"state is {rho.dim}-dim but projector is {p.dim}-dim")


def born_probability(rho: DensityMatrix, p: Projector) -> float:
    """Tr(P rho), the orthodox probability of answer Yes."""
    _check_dims(rho, p)
    value = complex(np.trace(p.mat @ rho.mat))
    if abs(value.imag) > rho.tol:
        raise InvalidOperatorError("not-hermitian", f"Tr(P rho) has imaginary part {value.imag:.3g}")
    prob = value.real
    if -rho.tol <= prob < 0.0:
        prob = 0.0
    elif 1.0 < prob <= 1.0 + rho.tol:
        prob = 1.0
    return prob


def question_for(p: Projector, outcome: Outcome) -> Projector:
    return p if outcome is Outcome.YES else complement(p)


def luders_update(rho: DensityMatrix, p: Projector, outcome: Outcome) -> DensityMatrix:
    """Collapse ``rho`` onto the answer ``outcome`` of question ``p``."""
    _check_dims(rho, p)
    proj = question_for(p, Outcome(outcome)).mat
    projected = proj @ rho.mat @ proj
    norm = np.trace(projected).real
    if norm < ZERO_PROB:
        raise ZeroProbabilityError(
            f"outcome {Outcome(outcome).value!r} has probability {norm:.3g}"
        )
    return validate_density(projected / norm, rho.tol)


def evolve(rho: DensityMatrix, u: UnitaryStep) -> DensityMatrix:
    if rho.dim != u.dim:
        raise DimensionError(f"state is {rho.dim}-dim but unitary is {u.dim}-dim")
    return validate_density(u.mat @ rho.mat @ u.mat.conj().T, rho.tol)


# -- multi-outcome questions -------------------------------------------------


@dataclass(frozen=True)
class Partition:
    parts: tuple


def decompose_multichoice(parts: Sequence[Projector], tol: float = DEFAULT_TOL) -> Partition:
    """Check that ``parts`` are mutually orthogonal and resolve the identity."""
    if not parts:
        raise InvalidOperatorError("not-complete", "empty partition")
    dim = parts[0].dim
    if any(p.dim != dim for p in parts):
        raise DimensionError("partition members have different dimensions")
    for i, a in enumerate(parts):
        for b in parts[i + 1:]:
            overlap = float(np.max(np.abs(a.mat @ b.mat)))
            if overlap > tol:
                raise InvalidOperatorError("not-orthogonal", f"max |P_i P_j| = {overlap:.3g}")
    total = sum(p.mat for p in parts)
    gap = float(np.max(np.abs(total - linalg.identity(dim))))
    if gap > tol:
        raise InvalidOperatorError("not-complete", f"max |sum P_i - I| = {gap:.3g}")
    return Partition(tuple(parts))


def partition_probabilities(rho: DensityMatrix, partition: Partition) -> np.ndarray:
    probs = np.array([born_probability(rho, p) for p in partition.parts])
    return probs / probs.sum()


def sample_partition(rho: DensityMatrix, partition: Partition, rng) -> tuple[int, DensityMatrix]:
    """Draw one branch of a multi-outcome question with Born weights and
    return its index together with the collapsed state."""
    probs = partition_probabilities(rho, partition)
    k = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    k = min(k, len(probs) - 1)
    return k, luders_update(rho, partition.parts[k], Outcome.YES)


# -- process time -------------------------------------------------------------


@dataclass(frozen=True)
class ProcessEvent:
    stage: int
    question: Projector
    outcome: Outcome
    pre_state: DensityMatrix
    post_state: DensityMatrix
    pre_unitary: Optional[UnitaryStep] = None


@dataclass(frozen=True)
class EventLog:
    """Initial state at stage 0 followed by one event per later stage."""

    initial_state: DensityMatrix
    events: tuple = field(default=())

    @property
    def latest_stage(self) -> int:
        return self.events[-1].stage if self.events else 0

    @property
    def current_state(self) -> DensityMatrix:
        return self.events[-1].post_state if self.events else self.initial_state

    def state_at(self, stage: int) -> DensityMatrix:
        """The state actually recorded at ``stage`` (before any later collapse)."""
        self._check_stage(stage)
        return self.initial_state if stage == 0 else self.events[stage - 1].post_state

    def append(self, event: ProcessEvent) -> "EventLog":
        if event.stage != self.latest_stage + 1:
            raise StageError(f"expected stage {self.latest_stage + 1}, got {event.stage}")
        if event.pre_state is not self.current_state:
            raise ValueError("event pre_state must be the current state of the log")
        return EventLog(self.initial_state, self.events + (event,))

    def _check_stage(self, stage: int) -> None:
        if not 0 <= stage <= self.latest_stage:
            raise StageError(f"stage {stage} outside 0..{self.latest_stage}")


def pose_question(
    log: EventLog,
    p: Projector,
    policy,
    rng,
    pre_unitary: Optional[UnitaryStep] = None,
) -> tuple[Outcome, EventLog]:
    """Probe the current state with question ``p``.

    The optional unitary is applied first; ``policy`` then picks the answer
    (any object with a ``sample(rho, p, rng)`` method) and the state is
    collapsed accordingly.
    """
    pre = log.current_state
    _check_dims(pre, p)
    evolved = evolve(pre, pre_unitary) if pre_unitary is not None else pre
    outcome = Outcome(policy.sample(evolved, p, rng))
    post = luders_update(evolved, p, outcome)
    event = ProcessEvent(log.latest_stage + 1, p, outcome, pre, post, pre_unitary)
    return outcome, log.append(event)


def _unitaries_after(log: EventLog, stage: int) -> list:
    return [e.pre_unitary for e in log.events if e.stage > stage and e.pre_unitary is not None]


def effective_history(log: EventLog, at_stage: int) -> DensityMatrix:
    """The effective past at ``at_stage``: the current state carried backward
    through every unitary logged after that stage. Collapses are not undone,
    so the result generally differs from the state recorded at the time."""
    log._check_stage(at_stage)
    mat = np.array(log.current_state.mat)
    for u in reversed(_unitaries_after(log, at_stage)):
        mat = u.mat.conj().T @ mat @ u.mat
    return validate_density(mat, log.current_state.tol)


def forward_evolve(log: EventLog, rho: DensityMatrix, from_stage: int) -> DensityMatrix:
    """Carry ``rho`` forward through the unitaries logged after ``from_stage``."""
    log._check_stage(from_stage)
    mat = np.array(rho.mat)
    for u in _unitaries_after(log, from_stage):
        mat = u.mat @ mat @ u.mat.conj().T
    return validate_density(mat, rho.tol)
