"""How nature picks an answer: orthodox chance, valence-biased weighting,
or a fixed answer. Also the Haar-averaging tools showing that an unknown
bias target washes out to orthodox statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import linalg
from .errors import (
    ImpossibleOutcomeError,
    NonCommutingError,
    ZeroConditioningError,
)
from .kernel import (
    DEFAULT_TOL,
    ZERO_PROB,
    DensityMatrix,
    Outcome,
    Projector,
    UnitaryStep,
    born_probability,
)

HAAR_TOL = 1e-10
_CHUNK = 4096


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """Generator for ``seed``; distinct ``stream`` indices give independent
    substreams of the same seed."""
    if stream is None:
        return np.random.default_rng(np.random.SeedSequence(int(seed)))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream),)))


class _Policy:
    def distribution(self, rho: DensityMatrix, p: Projector) -> tuple[float, float]:
        raise NotImplementedError

    def sample(self, rho: DensityMatrix, p: Projector, rng) -> Outcome:
        p_yes, _ = self.distribution(rho, p)
        # always consume exactly one variate so call sequences stay aligned
        u = rng.random()
        return Outcome.YES if u < p_yes else Outcome.NO


@dataclass(frozen=True)
class Orthodox(_Policy):
    def distribution(self, rho, p):
        q = born_probability(rho, p)
        return q, 1.0 - q


@dataclass(frozen=True)
class Biased(_Policy):
    """Born weights rescaled by ``weight_yes`` and ``weight_no`` and
    renormalized."""

    weight_yes: float
    weight_no: float = 1.0

    def __post_init__(self):
        for name in ("weight_yes", "weight_no"):
            w = getattr(self, name)
            if not (math.isfinite(w) and w > 0):
                raise ValueError(f"{name} must be positive and finite, got {w!r}")

    def distribution(self, rho, p):
        q = born_probability(rho, p)
        if self.weight_yes == self.weight_no:
            return q, 1.0 - q
        yes = self.weight_yes * q
        p_yes = yes / (yes + self.weight_no * (1.0 - q))
        return p_yes, 1.0 - p_yes


@dataclass(frozen=True)
class Deterministic(_Policy):
    outcome: Outcome = Outcome.YES

    def __post_init__(self):
        object.__setattr__(self, "outcome", Outcome(self.outcome))

    def distribution(self, rho, p):
        q = born_probability(rho, p)
        allowed = q if self.outcome is Outcome.YES else 1.0 - q
        if allowed < ZERO_PROB:
            raise ImpossibleOutcomeError(
                f"answer {self.outcome.value!r} has zero Born probability"
            )
        return (1.0, 0.0) if self.outcome is Outcome.YES else (0.0, 1.0)


ChoicePolicy = Union[Orthodox, Biased, Deterministic]


def outcome_distribution(policy: ChoicePolicy, rho: DensityMatrix, p: Projector) -> tuple[float, float]:
    return policy.distribution(rho, p)


def sample_outcome(policy: ChoicePolicy, rho: DensityMatrix, p: Projector, rng) -> Outcome:
    return policy.sample(rho, p, rng)


def biased_conditional_expectation(
    rho: DensityMatrix, p: Projector, q: Projector, tol: float = DEFAULT_TOL
) -> float:
    """Probability of Yes on ``p`` given that ``q`` is answered Yes for sure:
    Tr(PQ rho) / Tr(Q rho). The two questions must commute."""
    if linalg.commutator_norm(p.mat, q.mat) > tol:
        raise NonCommutingError("local and remote questions do not commute")
    denom = born_probability(rho, q)
    if denom <= tol:
        raise ZeroConditioningError(f"Tr(Q rho) = {denom:.3g}")
    num = linalg.trace(p.mat @ q.mat @ rho.mat).real
    return num / denom


# -- Haar averaging -----------------------------------------------------------


def haar_unitaries(dim: int, n: int, rng) -> np.ndarray:
    """``n`` Haar-random ``dim`` x ``dim`` unitaries, stacked on axis 0.

    QR of a complex Ginibre matrix, with each column of Q rephased by the
    phase of the matching diagonal entry of R; without that correction the
    distribution is not Haar. Draws are taken in order, so ``n`` calls with
    ``n=1`` consume the generator identically to one call with ``n``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = rng.standard_normal((n, dim, dim, 2))
    g = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=1, axis2=2)
    phases = d / np.abs(d)
    return q * phases[:, None, :]


def sample_haar_unitary(dim: int, rng) -> UnitaryStep:
    u = haar_unitaries(dim, 1, rng)[0]
    err = linalg.frobenius_distance(u.conj().T @ u, linalg.identity(dim))
    assert err <= HAAR_TOL, err
    return UnitaryStep(linalg.frozen(u))


def twirl_estimate(q: Projector, n_samples: int, rng) -> np.ndarray:
    """Monte Carlo average of U Q U^dagger over Haar-random U."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    dim = q.dim
    # the identity and the zero projector are fixed by every conjugation
    if q.rank == dim and np.array_equal(q.mat, linalg.identity(dim)):
        return linalg.identity(dim)
    if q.rank == 0 and not np.any(q.mat):
        return np.zeros((dim, dim), dtype=complex)
    total = np.zeros((dim, dim), dtype=complex)
    done = 0
    while done < n_samples:
        k = min(_CHUNK, n_samples - done)
        us = haar_unitaries(dim, k, rng)
        total += np.einsum("nij,jk,nlk->il", us, q.mat, us.conj())
        done += k
    return total / n_samples


def unknown_reason_expectation(
    rho: DensityMatrix, p: Projector, q: Projector, n_samples: int, rng
) -> float:
    """Biased expectation of ``p`` when the favoured question is ``q`` rotated
    by an unknown Haar-random unitary; numerator and denominator are each
    averaged before dividing."""
    twirled = twirl_estimate(q, n_samples, rng)
    num = linalg.trace(p.mat @ twirled @ rho.mat).real
    den = linalg.trace(twirled @ rho.mat).real
    if den <= ZERO_PROB:
        raise ZeroConditioningError(f"averaged Tr(Q rho) = {den:.3g}")
    return num / den
