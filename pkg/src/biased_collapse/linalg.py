"""Dense complex matrix algebra on small (desk-scale) operators.

Matrices are plain 2-D ``complex128`` numpy arrays. Every function here is
pure: inputs are never modified and results are fresh arrays.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

MAX_DIM = 64


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    if isinstance(m, np.ndarray) and m.dtype == np.complex128 and m.ndim == 2:
        # already validated arrays are read-only; skip the finiteness scan
        if not m.flags.writeable:
            return m
        arr = m
    else:
        arr = np.array(m, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError("matrix must have at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("matrix entries must be finite")
    return arr


def frozen(m) -> np.ndarray:
    """Return a read-only copy, used by the immutable quantum objects."""
    arr = as_matrix(m).copy()
    arr.setflags(write=False)
    return arr


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T.copy()


def multiply(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got {m.shape}")


def trace(m) -> complex:
    m = as_matrix(m)
    _require_square(m)
    return complex(np.trace(m))


def tensor_product(*ms) -> np.ndarray:
    """Kronecker product; factor 0 is the leftmost subsystem."""
    if not ms:
        raise DimensionError("tensor_product needs at least one factor")
    return reduce(np.kron, (as_matrix(m) for m in ms))


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduce ``m`` to the subsystems in ``keep``, summing out the rest.

    ``dims`` lists subsystem dimensions left to right. Keeping nothing
    returns the 1x1 matrix holding the full trace.
    """
    m = as_matrix(m)
    _require_square(m)
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionError(f"dims {dims} do not factor a {m.shape[0]}-dim matrix")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = m.reshape(dims + dims)
    # trace out from the highest index so remaining axis positions stay valid
    for k in reversed(range(n)):
        if k in keep:
            continue
        n_left = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + n_left)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def frobenius_distance(a, b) -> float:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2)))


def commutator_norm(a, b) -> float:
    """Frobenius norm of AB - BA."""
    return frobenius_distance(multiply(a, b), multiply(b, a))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros((dim, 1), dtype=complex)
    v[index, 0] = 1.0
    return v


def outer(v) -> np.ndarray:
    """|v><v| for a column (or flat) vector, without normalizing."""
    v = np.asarray(v, dtype=complex).reshape(-1, 1)
    return v @ v.conj().T


def basis_projector(index: int, dim: int = 2) -> np.ndarray:
    return outer(ket(index, dim))


def embed(op, site: int, dims: Sequence[int]) -> np.ndarray:
    """Place ``op`` on subsystem ``site``, identity elsewhere."""
    op = as_matrix(op)
    if op.shape != (dims[site], dims[site]):
        raise DimensionError(f"operator {op.shape} does not act on a {dims[site]}-dim site")
    factors = [op if k == site else identity(d) for k, d in enumerate(dims)]
    return tensor_product(*factors)
