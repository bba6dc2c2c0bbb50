"""Density-matrix simulator of projective measurement with pluggable
outcome-selection policies."""

from .errors import BiasedCollapseError
from .kernel import (
    DensityMatrix,
    EventLog,
    Outcome,
    Projector,
    UnitaryStep,
    born_probability,
    complement,
    decompose_multichoice,
    effective_history,
    luders_update,
    pose_question,
    validate_density,
    validate_projector,
    validate_unitary,
)
from .policy import (
    Biased,
    Deterministic,
    Orthodox,
    biased_conditional_expectation,
    make_rng,
    outcome_distribution,
    sample_haar_unitary,
    sample_outcome,
    twirl_estimate,
    unknown_reason_expectation,
)

__version__ = "0.1.0"
