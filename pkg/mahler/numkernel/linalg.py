"""
Dense symmetric linear algebra for small matrices (dims ≤ 16).

Cholesky comes from numpy; eigendecompositions use a cyclic Jacobi sweep,
which is deterministic and robust for the symmetric positive-definite forms
that define ellipsoids. Matrix square roots are taken through the Jacobi
eigendecomposition.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from mahler.errors import DimensionMismatchError, DomainError, NotPositiveDefiniteError

LOG = logging.getLogger(__name__)

# Relative asymmetry tolerated on input before symmetrizing.
_SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class SymMatrix:
    """
    Immutable symmetric matrix.

    The stored entries are exactly symmetric: inputs within a relative
    asymmetry of 1e-10 are replaced by ``(A + Aᵀ)/2``.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DomainError(f"SymMatrix needs a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("SymMatrix entries must be finite")
        scale = max(float(np.max(np.abs(a))), 1.0)
        if float(np.max(np.abs(a - a.T))) > _SYMMETRY_RTOL * scale:
            raise DomainError("SymMatrix entries are not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, n: int, scale: float = 1.0) -> "SymMatrix":
        return cls(scale * np.eye(n))

    @classmethod
    def diag(cls, values) -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.entries, dtype=dtype)

    def scaled(self, t: float) -> "SymMatrix":
        return SymMatrix(float(t) * self.entries)

    def inverse(self) -> "SymMatrix":
        return SymMatrix(np.linalg.inv(self.entries))

    def congruence(self, T: np.ndarray) -> "SymMatrix":
        """Return Tᵀ M T."""
        T = np.asarray(T, dtype=float)
        return SymMatrix(T.T @ self.entries @ T)

    def quadratic(self, X: np.ndarray) -> np.ndarray:
        """Row-wise quadratic form xᵀ M x for an (m, n) array."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.einsum("ij,jk,ik->i", X, self.entries, X)

    def to_list(self) -> list[list[float]]:
        return [[float(v) for v in row] for row in self.entries]


def as_sym_matrix(M) -> SymMatrix:
    """Promote an array-like to :class:`SymMatrix` (no copy if already one)."""
    if isinstance(M, SymMatrix):
        return M
    return SymMatrix(np.asarray(M, dtype=float))


def jacobi_eigh(
    M,
    tol: float = 1e-12,
    max_sweeps: int = 64,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    M:
        Symmetric matrix (array-like or :class:`SymMatrix`).
    tol:
        Sweeps stop once the off-diagonal Frobenius norm is at most
        ``tol * ||M||_F``.
    max_sweeps:
        Hard cap on the number of sweeps.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues in ascending order and the orthogonal matrix whose
        columns are the matching eigenvectors.
    """
    a = np.array(as_sym_matrix(M).entries, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), v

    for sweep in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                theta = (float(a[q, q]) - float(a[p, p])) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        LOG.warning("Jacobi eigensolver hit %d sweeps without converging", max_sweeps)

    w = np.diag(a).copy()
    order = np.argsort(w)
    return w[order], v[:, order]


@dataclass
class SymFactorization:
    """
    Factorization of a symmetric positive-definite matrix.

    lower:
        Cholesky factor L with L Lᵀ = M.
    logdet:
        ln det M.
    """

    matrix: SymMatrix
    lower: np.ndarray
    logdet: float
    _eig: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    def eigh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Jacobi eigendecomposition, computed on first use."""
        if self._eig is None:
            self._eig = jacobi_eigh(self.matrix)
        return self._eig

    def solve(self, B: np.ndarray) -> np.ndarray:
        """Solve M X = B through the Cholesky factor."""
        y = np.linalg.solve(self.lower, B)
        return np.linalg.solve(self.lower.T, y)


def sym_factor(M) -> SymFactorization:
    """
    Cholesky-factor a symmetric matrix.

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix is not positive-definite. Callers use this as the PD test.
    """
    sm = as_sym_matrix(M)
    try:
        lower = np.linalg.cholesky(sm.entries)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive-definite") from exc
    diag = np.diag(lower)
    if np.any(diag <= 0.0) or not np.all(np.isfinite(diag)):
        raise NotPositiveDefiniteError("matrix is not positive-definite")
    logdet = 2.0 * float(np.sum(np.log(diag)))
    return SymFactorization(matrix=sm, lower=lower, logdet=logdet)


def is_positive_definite(M) -> bool:
    try:
        sym_factor(M)
    except NotPositiveDefiniteError:
        return False
    return True


def sym_power(M, alpha: float) -> SymMatrix:
    """
    Return M^alpha for a symmetric positive-definite M.

    Computed as V diag(w^alpha) Vᵀ from the Jacobi eigendecomposition.
    """
    fac = sym_factor(M)
    w, v = fac.eigh()
    if np.any(w <= 0.0):
        raise NotPositiveDefiniteError("matrix power needs positive eigenvalues")
    return SymMatrix((v * w**alpha) @ v.T)


def matrix_geometric_mean(M, N) -> SymMatrix:
    """
    Geometric mean of two positive-definite forms.

    Returns the unique positive-definite Q with Q M⁻¹ Q = N, computed as
    M^{1/2} (M^{-1/2} N M^{-1/2})^{1/2} M^{1/2}.

    Raises
    ------
    DimensionMismatchError
        If the matrices have different sizes.
    NotPositiveDefiniteError
        If either input is not positive-definite.
    """
    m = as_sym_matrix(M)
    nn = as_sym_matrix(N)
    if m.dim != nn.dim:
        raise DimensionMismatchError(
            f"geometric mean needs equal dimensions, got {m.dim} and {nn.dim}"
        )
    sym_factor(nn)
    m_half = sym_power(m, 0.5)
    m_inv_half = sym_power(m, -0.5)
    inner = SymMatrix(m_inv_half.entries @ nn.entries @ m_inv_half.entries)
    q = SymMatrix(m_half.entries @ sym_power(inner, 0.5).entries @ m_half.entries)

    residual = geometric_mean_residual(m, nn, q)
    if residual > 1e-10:
        LOG.warning("geometric mean residual %.3e exceeds 1e-10", residual)
    return q


def geometric_mean_residual(M, N, Q) -> float:
    """Relative residual ||Q M⁻¹ Q − N|| / ||N|| (Frobenius)."""
    m = as_sym_matrix(M).entries
    nn = as_sym_matrix(N).entries
    q = as_sym_matrix(Q).entries
    lhs = q @ np.linalg.solve(m, q)
    return float(np.linalg.norm(lhs - nn) / np.linalg.norm(nn))
