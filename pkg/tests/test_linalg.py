import itertools
import math

import numpy as np
import pytest
from hypothesis import given

from biased_collapse import linalg
from biased_collapse.errors import DimensionError

from conftest import complex_matrices

I2 = np.eye(2, dtype=complex)


def loop_multiply(a, b):
    out = [[0j] * b.shape[1] for _ in range(a.shape[0])]
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i][j] += a[i, k] * b[k, j]
    return np.array(out)


def basis_sum_partial_trace(m, dims, keep):
    """Sum matrix elements over the traced-out indices, one basis label at a time."""
    keep = sorted(keep)
    labels = list(itertools.product(*[range(d) for d in dims]))
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    index = {lab: n for n, lab in enumerate(labels)}
    kept_labels = list(itertools.product(*[range(dims[k]) for k in keep]))
    out = np.zeros((kept_dim, kept_dim), dtype=complex)
    for a, ka in enumerate(kept_labels):
        for b, kb in enumerate(kept_labels):
            for lab in labels:
                if tuple(lab[k] for k in keep) != ka:
                    continue
                other = list(lab)
                for pos, k in enumerate(keep):
                    other[k] = kb[pos]
                out[a, b] += m[index[lab], index[tuple(other)]]
    return out


def test_adjoint_examples():
    np.testing.assert_array_equal(linalg.adjoint(I2), I2)
    np.testing.assert_array_equal(linalg.adjoint([[0, 1j], [0, 0]]), [[0, 0], [-1j, 0]])


@given(complex_matrices(3, 2))
def test_adjoint_involution(m):
    assert linalg.adjoint(m).shape == (2, 3)
    np.testing.assert_array_equal(linalg.adjoint(linalg.adjoint(m)), m)


@given(complex_matrices(2, 3), complex_matrices(3, 2))
def test_adjoint_reverses_products(a, b):
    lhs = linalg.adjoint(linalg.multiply(a, b))
    rhs = linalg.multiply(linalg.adjoint(b), linalg.adjoint(a))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_multiply_identity_and_mismatch(rng):
    m = rng.standard_normal((2, 3)) + 0j
    np.testing.assert_array_equal(linalg.multiply(I2, m), m)
    with pytest.raises(DimensionError):
        linalg.multiply(m, m)


@given(complex_matrices(2, 2), complex_matrices(2, 2))
def test_multiply_matches_loop_oracle(a, b):
    np.testing.assert_allclose(linalg.multiply(a, b), loop_multiply(a, b), atol=1e-12)


def test_projector_is_idempotent():
    p = linalg.outer(np.array([1, 1j]) / math.sqrt(2))
    np.testing.assert_allclose(linalg.multiply(p, p), p, atol=1e-12)


def test_trace_examples():
    assert linalg.trace(np.eye(4)) == 4
    assert linalg.trace(linalg.basis_projector(0)) == 1
    with pytest.raises(DimensionError):
        linalg.trace(np.ones((2, 3)))


@given(complex_matrices(3, 3), complex_matrices(3, 3))
def test_trace_cyclic(x, y):
    assert abs(linalg.trace(x @ y) - linalg.trace(y @ x)) <= 1e-12 * max(1.0, np.abs(x).sum() * np.abs(y).sum())


def test_trace_cyclic_unit_scale(rng):
    for _ in range(50):
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert abs(linalg.trace(x @ y) - linalg.trace(y @ x)) <= 1e-12


def test_tensor_product_examples():
    np.testing.assert_array_equal(linalg.tensor_product(I2, I2), np.eye(4))
    a = linalg.tensor_product(linalg.basis_projector(0), I2)
    b = linalg.tensor_product(I2, linalg.basis_projector(0))
    np.testing.assert_array_equal(a @ b, b @ a)


@given(complex_matrices(2, 2), complex_matrices(2, 2), complex_matrices(2, 2))
def test_tensor_product_associative(a, b, c):
    left = linalg.tensor_product(linalg.tensor_product(a, b), c)
    right = linalg.tensor_product(a, linalg.tensor_product(b, c))
    np.testing.assert_allclose(left, right, rtol=1e-15, atol=1e-13)


def test_trace_multiplicative(rng):
    for _ in range(50):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        lhs = linalg.trace(linalg.tensor_product(a, b))
        assert abs(lhs - linalg.trace(a) * linalg.trace(b)) <= 1e-12


def test_partial_trace_epr_like():
    rho = np.diag([0, 0.5, 0.5, 0]).astype(complex)
    np.testing.assert_allclose(linalg.partial_trace(rho, [2, 2], {0}), I2 / 2, atol=1e-15)
    np.testing.assert_allclose(basis_sum_partial_trace(rho, [2, 2], [0]), I2 / 2, atol=1e-15)


@pytest.mark.parametrize("dims,keep", [([2, 2], [0]), ([2, 2], [1]), ([2, 3, 2], [0, 2]), ([3, 2, 2], [1]), ([2, 2, 2], [])])
def test_partial_trace_matches_basis_sum(rng, dims, keep):
    n = int(np.prod(dims))
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    np.testing.assert_allclose(linalg.partial_trace(m, dims, keep), basis_sum_partial_trace(m, dims, keep), atol=1e-12)


def test_partial_trace_product_state(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    ab = linalg.tensor_product(a, b)
    np.testing.assert_allclose(linalg.partial_trace(ab, [2, 3], {0}), a * np.trace(b), atol=1e-12)
    np.testing.assert_allclose(linalg.partial_trace(ab, [2, 3], {1}), b * np.trace(a), atol=1e-12)


def test_partial_trace_preserves_trace(rng):
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    for keep in [(), (0,), (1,), (2,), (0, 1), (1, 2), (0, 1, 2)]:
        assert abs(np.trace(linalg.partial_trace(m, [2, 2, 2], keep)) - np.trace(m)) <= 1e-12


def test_partial_trace_errors():
    with pytest.raises(DimensionError):
        linalg.partial_trace(np.eye(4), [2, 3], [0])
    with pytest.raises(DimensionError):
        linalg.partial_trace(np.eye(4), [2, 2], [2])


def test_frobenius_distance(rng):
    m = rng.standard_normal((3, 3)) + 0j
    assert linalg.frobenius_distance(m, m) == 0
    assert linalg.frobenius_distance(I2, np.zeros((2, 2))) == pytest.approx(math.sqrt(2), abs=1e-15)
    with pytest.raises(DimensionError):
        linalg.frobenius_distance(I2, np.eye(3))


@given(complex_matrices(2, 3), complex_matrices(2, 3))
def test_frobenius_symmetric(a, b):
    assert linalg.frobenius_distance(a, b) == linalg.frobenius_distance(b, a)


def test_rejects_non_finite():
    with pytest.raises(DimensionError):
        linalg.as_matrix([[np.nan, 0], [0, 1]])
