"""Vector kernels and the ridge least-squares solve."""

from __future__ import annotations

from typing import List

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ooskge.numerics import (
    DimensionMismatchError,
    SingularSystemError,
    hadamard,
    norm2,
    ridge_solve,
    triple_dot,
)


def _gaussian_elimination(matrix: List[List[float]], rhs: List[float]) -> List[float]:
    """Plain partial-pivoting elimination, independent of numpy/scipy solvers."""
    n = len(rhs)
    rows = [list(matrix[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(rows[r][col]))
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(col + 1, n):
            factor = rows[r][col] / rows[col][col]
            for c in range(col, n + 1):
                rows[r][c] -= factor * rows[col][c]
    solution = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = rows[r][n] - sum(rows[r][c] * solution[c] for c in range(r + 1, n))
        solution[r] = acc / rows[r][r]
    return solution


def _ridge_oracle(a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    n_rows, dim = a.shape
    gram = [
        [sum(a[k][i] * a[k][j] for k in range(n_rows)) + (lam if i == j else 0.0) for j in range(dim)]
        for i in range(dim)
    ]
    rhs = [sum(a[k][i] * b[k] for k in range(n_rows)) for i in range(dim)]
    return np.array(_gaussian_elimination(gram, rhs))


def _objective(a: np.ndarray, b: np.ndarray, lam: float, z: np.ndarray) -> float:
    residual = a @ z - b
    return float(residual @ residual + lam * z @ z)


def test_hadamard_examples() -> None:
    assert hadamard([1, 2], [3, 4]).tolist() == [3.0, 8.0]
    assert hadamard([1.5, -2], [0, 0]).tolist() == [0.0, 0.0]
    assert hadamard([1.5, -2], [1, 1]).tolist() == [1.5, -2.0]


def test_triple_dot_examples() -> None:
    rng = np.random.default_rng(0)
    a, b, c = rng.normal(size=(3, 7))

    assert triple_dot([1, 2], [3, 4], [5, 6]) == 63.0
    assert triple_dot(a, b, np.zeros(7)) == 0.0
    assert triple_dot(a, b, c) == pytest.approx(triple_dot(c, b, a), rel=1e-12)
    assert triple_dot(a, b, c) == pytest.approx(float(np.dot(a, hadamard(b, c))), rel=1e-12)


def test_norm2_examples() -> None:
    assert norm2([3, 4]) == 5.0
    assert norm2(np.zeros(3)) == 0.0
    assert norm2([0, 1, 0]) == 1.0


@pytest.mark.parametrize("op", [hadamard, lambda a, b: triple_dot(a, b, b)])
def test_length_mismatch_raises(op) -> None:
    with pytest.raises(DimensionMismatchError):
        op([1.0, 2.0], [1.0, 2.0, 3.0])


def test_ridge_hand_examples() -> None:
    np.testing.assert_allclose(ridge_solve([[1.0, 0.0]], [1.0], 0.5), [2 / 3, 0.0], atol=1e-12)
    np.testing.assert_allclose(ridge_solve(np.eye(2), [1.0, 1.0], 0.0), [1.0, 1.0], atol=1e-12)


def test_ridge_matches_elimination_oracle_on_random_instances() -> None:
    rng = np.random.default_rng(42)
    for _ in range(200):
        n_rows = int(rng.integers(1, 11))
        dim = int(rng.integers(1, 9))
        a = rng.normal(size=(n_rows, dim))
        b = rng.normal(size=n_rows)
        lam = float(rng.uniform(0.05, 2.0))

        np.testing.assert_allclose(ridge_solve(a, b, lam), _ridge_oracle(a, b, lam), atol=1e-8)


def test_ridge_unregularized_full_rank_matches_oracle() -> None:
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 4))
    b = rng.normal(size=6)

    np.testing.assert_allclose(ridge_solve(a, b, 0.0), _ridge_oracle(a, b, 0.0), atol=1e-8)


def test_ridge_unregularized_singular_raises() -> None:
    with pytest.raises(SingularSystemError):
        ridge_solve([[1.0, 0.0], [2.0, 0.0]], [1.0, 2.0], 0.0)
    with pytest.raises(SingularSystemError):
        ridge_solve(np.zeros((3, 2)), np.ones(3), 0.0)


def test_ridge_rejects_bad_shapes_and_lambda() -> None:
    with pytest.raises(DimensionMismatchError):
        ridge_solve(np.ones((3, 2)), np.ones(2), 0.1)
    with pytest.raises(DimensionMismatchError):
        ridge_solve(np.ones((0, 2)), np.ones(0), 0.1)
    with pytest.raises(ValueError):
        ridge_solve(np.ones((2, 2)), np.ones(2), -1.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_ridge_solution_is_a_minimizer(seed: int) -> None:
    rng = np.random.default_rng(seed)
    n_rows, dim = int(rng.integers(1, 9)), int(rng.integers(1, 7))
    a = rng.normal(size=(n_rows, dim))
    b = rng.normal(size=n_rows)
    lam = float(rng.uniform(0.01, 1.0))

    z = ridge_solve(a, b, lam)
    best = _objective(a, b, lam, z)
    for _ in range(10):
        delta = rng.normal(scale=1e-3, size=dim)
        assert best <= _objective(a, b, lam, z + delta) + 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_ridge_norm_shrinks_with_lambda(seed: int) -> None:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, 3))
    b = rng.normal(size=5)
    small, large = sorted(rng.uniform(0.001, 5.0, size=2))

    assert np.linalg.norm(ridge_solve(a, b, small)) >= np.linalg.norm(ridge_solve(a, b, large)) - 1e-12
