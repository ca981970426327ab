"""Dense vector and matrix kernels for scoring, aggregation and ridge solves."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg


class DimensionMismatchError(ValueError):
    """Raised when vector or matrix operands have inconsistent shapes."""


class SingularSystemError(RuntimeError):
    """Raised when an unregularized normal-equation system is not positive definite."""


def _vector(value: ArrayLike, name: str) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.ndim != 1:
        raise DimensionMismatchError(f"{name} must be a vector, got shape {array.shape}")
    return array


def _same_length(*vectors: np.ndarray) -> None:
    lengths = {vector.shape[0] for vector in vectors}
    if len(lengths) != 1:
        raise DimensionMismatchError(f"Vector lengths differ: {sorted(lengths)}")


def hadamard(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Element-wise product of two equal-length vectors."""
    left, right = _vector(a, "a"), _vector(b, "b")
    _same_length(left, right)
    out = left * right
    assert np.all(np.isfinite(out)), "non-finite hadamard product"
    return out


def triple_dot(a: ArrayLike, b: ArrayLike, c: ArrayLike) -> float:
    """Sum of the element-wise product of three vectors."""
    first, second, third = _vector(a, "a"), _vector(b, "b"), _vector(c, "c")
    _same_length(first, second, third)
    return float(np.dot(first, second * third))


def norm2(a: ArrayLike) -> float:
    return float(np.linalg.norm(_vector(a, "a")))


def ridge_solve(A: ArrayLike, b: ArrayLike, lam: float) -> np.ndarray:
    """Minimise ||Az - b||^2 + lam ||z||^2 through the normal equations.

    Forms the d x d system (A^T A + lam I) z = A^T b and solves it with a
    Cholesky factorization, so the cost is O(N d^2 + d^3).
    """
    matrix = np.asarray(A, dtype=np.float64)
    target = _vector(b, "b")
    if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
        raise DimensionMismatchError(f"A must be a non-empty matrix, got shape {matrix.shape}")
    if matrix.shape[0] != target.shape[0]:
        raise DimensionMismatchError(
            f"A has {matrix.shape[0]} rows but b has {target.shape[0]} entries"
        )
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"Regularizer must be a finite non-negative number, got {lam}")

    dim = matrix.shape[1]
    gram = matrix.T @ matrix
    if lam:
        gram[np.diag_indices(dim)] += lam
    rhs = matrix.T @ target
    try:
        factor, lower = linalg.cho_factor(gram, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularSystemError(f"Normal equations are singular: {exc}") from exc
    if lam == 0:
        pivots = np.diag(factor) ** 2
        # rank-deficient Gram matrices can factor with pivots at rounding level
        if pivots.min() <= dim * np.finfo(np.float64).eps * pivots.max():
            raise SingularSystemError("Normal equations are numerically singular")
    solution = linalg.cho_solve((factor, lower), rhs, check_finite=False)
    assert np.all(np.isfinite(solution)), "non-finite ridge solution"
    return solution


__all__ = [
    "DimensionMismatchError",
    "SingularSystemError",
    "hadamard",
    "norm2",
    "ridge_solve",
    "triple_dot",
]
