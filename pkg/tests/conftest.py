import numpy as np
import pytest
from hypothesis import strategies as st

from biased_collapse import linalg
from biased_collapse.kernel import validate_density, validate_projector

# acceptance verdicts collected by test_acceptance.py, printed at the end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def complex_matrices(rows, cols, scale=3.0):
    elems = st.floats(-scale, scale, allow_nan=False, allow_infinity=False)
    return st.lists(elems, min_size=2 * rows * cols, max_size=2 * rows * cols).map(
        lambda xs: (np.array(xs[::2]) + 1j * np.array(xs[1::2])).reshape(rows, cols)
    )


seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_state(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return validate_density(m / np.trace(m).real)


def random_rank1(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return validate_projector(linalg.outer(v / np.linalg.norm(v)))


@pytest.fixture
def epr_like():
    """(|01><01| + |10><10|)/2 with P = |0><0| x I and Q = I x |0><0|."""
    p = validate_projector(np.kron(linalg.basis_projector(0), np.eye(2)))
    q = validate_projector(np.kron(np.eye(2), linalg.basis_projector(0)))
    rho = validate_density(np.diag([0, 0.5, 0.5, 0]).astype(complex))
    return rho, p, q
