from __future__ import annotations

import math
import warnings

import mpmath
import numpy as np
import pytest

from mahler.errors import DimensionMismatchError, DomainError, NotPositiveDefiniteError
from mahler.numkernel import (
    SymMatrix,
    ball_volume,
    frac_binom,
    geometric_mean_residual,
    is_positive_definite,
    jacobi_eigh,
    log_gamma,
    matrix_geometric_mean,
    sym_factor,
    sym_power,
)


@pytest.mark.parametrize("x", [0.25, 0.5, 1.0, 2.0, 3.7, 12.5, 50.0, 171.3])
def test_log_gamma_matches_mpmath(x: float) -> None:
    """ln Γ agrees with the arbitrary-precision oracle."""
    expected = float(mpmath.loggamma(mpmath.mpf(x)))
    assert log_gamma(x) == pytest.approx(expected, rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_log_gamma_rejects_non_positive(x: float) -> None:
    with pytest.raises(DomainError):
        log_gamma(x)


def test_frac_binom_values() -> None:
    """Fractional binomials: the half-integer case and ordinary integers."""
    assert frac_binom(1.0, 0.5) == pytest.approx(4.0 / math.pi, rel=1e-13)
    assert frac_binom(5, 2) == pytest.approx(10.0, rel=1e-13)
    assert frac_binom(3.0, 0.0) == pytest.approx(1.0, rel=1e-13)
    with pytest.raises(DomainError):
        frac_binom(2.0, 3.0)
    with pytest.raises(DomainError):
        frac_binom(2.0, -0.5)


@pytest.mark.parametrize(
    "n, expected",
    [(1, 2.0), (2, math.pi), (3, 4.0 * math.pi / 3.0), (4, math.pi**2 / 2.0)],
)
def test_ball_volume_small_dimensions(n: int, expected: float) -> None:
    assert ball_volume(n) == pytest.approx(expected, rel=1e-13)


def test_ball_volume_rejects_zero_dimension() -> None:
    with pytest.raises(DomainError):
        ball_volume(0)


def test_sym_matrix_rejects_asymmetric_entries() -> None:
    with pytest.raises(DomainError):
        SymMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sym_factor_cholesky_and_logdet() -> None:
    """L Lᵀ reproduces M and logdet matches numpy."""
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 5))
    M = A @ A.T + 5.0 * np.eye(5)
    fac = sym_factor(M)
    assert np.allclose(fac.lower @ fac.lower.T, M, rtol=1e-10, atol=1e-12)
    assert fac.logdet == pytest.approx(np.linalg.slogdet(M)[1], rel=1e-12)
    b = rng.standard_normal(5)
    assert np.allclose(M @ fac.solve(b), b)


def test_sym_factor_rejects_indefinite_matrix() -> None:
    M = np.diag([1.0, -1.0])
    with pytest.raises(NotPositiveDefiniteError):
        sym_factor(M)
    assert not is_positive_definite(M)
    assert is_positive_definite(np.eye(3))


def test_jacobi_eigh_matches_numpy() -> None:
    """Eigenvalues agree with numpy.linalg.eigh and the vectors diagonalize M."""
    rng = np.random.default_rng(11)
    A = rng.standard_normal((6, 6))
    M = 0.5 * (A + A.T)
    w, v = jacobi_eigh(M)
    w_ref = np.linalg.eigh(M)[0]
    assert np.allclose(w, w_ref, atol=1e-10)
    assert np.allclose(v.T @ v, np.eye(6), atol=1e-10)
    assert np.allclose(v @ np.diag(w) @ v.T, M, atol=1e-10)


def test_sym_power_square_root() -> None:
    M = np.array([[4.0, 1.0], [1.0, 3.0]])
    R = sym_power(M, 0.5).entries
    assert np.allclose(R @ R, M, atol=1e-12)


def test_matrix_geometric_mean_diagonal() -> None:
    """For commuting forms the geometric mean is the entrywise square root."""
    Q = matrix_geometric_mean(np.diag([1.0, 4.0]), np.diag([9.0, 16.0]))
    assert np.allclose(Q.entries, np.diag([3.0, 8.0]), atol=1e-12)


def test_matrix_geometric_mean_general() -> None:
    """Q M⁻¹ Q = N for a random positive-definite pair."""
    rng = np.random.default_rng(5)
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    M = A @ A.T + np.eye(4)
    N = B @ B.T + np.eye(4)
    Q = matrix_geometric_mean(M, N)
    assert geometric_mean_residual(M, N, Q) <= 1e-10
    # symmetric in its arguments
    assert np.allclose(matrix_geometric_mean(N, M).entries, Q.entries, atol=1e-9)


def test_matrix_geometric_mean_dimension_mismatch() -> None:
    with pytest.raises(DimensionMismatchError):
        matrix_geometric_mean(np.eye(2), np.eye(3))


def test_log_gamma_functional_equation() -> None:
    """Γ(x+1) = x·Γ(x) across [0.5, 50]."""
    for x in np.linspace(0.5, 50.0, 400):
        x = float(x)
        assert math.exp(log_gamma(x + 1.0)) == pytest.approx(x * math.exp(log_gamma(x)), rel=1e-10)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.5, 7.0, 13.25, 40.0])
def test_frac_binom_symmetry(x: float) -> None:
    for y in np.linspace(0.0, x, 17):
        y = float(y)
        assert frac_binom(x, y) == pytest.approx(frac_binom(x, x - y), rel=1e-12)


def test_ball_volume_recurrence() -> None:
    for n in range(3, 60):
        assert ball_volume(n) == pytest.approx(ball_volume(n - 2) * 2.0 * math.pi / n, rel=1e-12)


def test_jacobi_eigh_tiny_off_diagonal_stays_finite() -> None:
    """A rotation angle near zero must not overflow while other pairs still rotate."""
    M = np.array([[1.0, 1e-160, 0.0], [1e-160, 2.0, 1.0], [0.0, 1.0, 3.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        w, v = jacobi_eigh(M)
    assert np.all(np.isfinite(v))
    assert np.allclose(w, np.linalg.eigh(M)[0], atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.T, M, atol=1e-12)


@pytest.mark.parametrize(
    "M, N, expected",
    [
        (np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([[2.0, 0.5], [0.5, 1.0]])),
        (0.5 * np.eye(2), 100.0 * np.eye(2), math.sqrt(50.0) * np.eye(2)),
        (np.diag([1.0, 4.0]), np.diag([9.0, 1.0]), np.diag([3.0, 2.0])),
    ],
)
def test_matrix_geometric_mean_reference_values(M: np.ndarray, N: np.ndarray, expected: np.ndarray) -> None:
    Q = matrix_geometric_mean(M, N)
    assert np.allclose(Q.entries, expected, rtol=1e-12, atol=1e-12)
    assert geometric_mean_residual(M, N, Q) <= 1e-10


@pytest.mark.parametrize("alpha", [1e-3, 0.5, 3.0, 250.0])
def test_matrix_geometric_mean_is_homogeneous(alpha: float) -> None:
    rng = np.random.default_rng(17)
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3))
    M = A @ A.T + np.eye(3)
    N = B @ B.T + 0.5 * np.eye(3)
    Q = matrix_geometric_mean(M, N).entries
    Q_scaled = matrix_geometric_mean(alpha * M, alpha * N).entries
    assert np.allclose(Q_scaled, alpha * Q, rtol=1e-10, atol=1e-12 * alpha)
