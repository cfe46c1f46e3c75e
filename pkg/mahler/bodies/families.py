"""
Concrete symmetric body families.

* :class:`Ellipsoid`: {x : xᵀMx ≤ 1} for a positive-definite form M.
* :class:`SymPolytope`: conv{±v_i} and/or {x : |a_iᵀx| ≤ 1}.
* :class:`Cube`, :class:`CrossPolytope`: the unit ℓ_∞ / ℓ_1 balls, with
  closed-form oracles and lazily generated vertex/facet lists.
* :class:`LpBall`: the unit ℓ_p ball for 1 < p < ∞.

Use :func:`lp_ball` to get the canonical representative for any p ∈ [1, ∞].
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import Any, Dict, Optional

import numpy as np

from mahler.bodies.base import SymBody
from mahler.errors import (
    ConfigurationError,
    DegenerateBodyError,
    DimensionMismatchError,
    DomainError,
)
from mahler.numkernel.linalg import SymMatrix, as_sym_matrix, jacobi_eigh, sym_factor
from mahler.numkernel.simplex import LPProblem, lp_solve
from mahler.numkernel.special import log_ball_volume

LOG = logging.getLogger(__name__)

# Tolerance for the vertex/facet tightness check.
_TIGHT_TOL = 1e-9

# Sign-vector lists are materialized only up to this dimension.
_MAX_SIGN_DIM = 20


# ---------------------------------------------------------------------------
# Ellipsoids
# ---------------------------------------------------------------------------


class Ellipsoid(SymBody):
    """
    Centered ellipsoid {x : xᵀMx ≤ 1}.

    Parameters
    ----------
    form:
        Positive-definite matrix M (array-like or :class:`SymMatrix`).
    metadata:
        Free-form provenance notes (e.g. inflation factors from Löwner).
    """

    def __init__(self, form, metadata: Optional[Dict[str, Any]] = None) -> None:
        form = as_sym_matrix(form)
        super().__init__(form.dim)
        self._factor = sym_factor(form)
        self.form = form
        self.inverse_form = form.inverse()
        self.metadata: Dict[str, Any] = dict(metadata or {})

    @classmethod
    def ball(cls, n: int, radius: float = 1.0) -> "Ellipsoid":
        if radius <= 0.0:
            raise DomainError(f"ball radius must be positive, got {radius!r}")
        return cls(SymMatrix.identity(n, 1.0 / radius**2))

    def gauges(self, X: np.ndarray) -> np.ndarray:
        X = self._as_points(X)
        return np.sqrt(np.maximum(self.form.quadratic(X), 0.0))

    def supports(self, Y: np.ndarray) -> np.ndarray:
        Y = self._as_points(Y)
        return np.sqrt(np.maximum(self.inverse_form.quadratic(Y), 0.0))

    def polar(self) -> "Ellipsoid":
        return Ellipsoid(self.inverse_form)

    def describe(self) -> Dict[str, Any]:
        return {"type": "ellipsoid", "matrix": self.form.to_list()}

    @property
    def logdet(self) -> float:
        return self._factor.logdet

    @property
    def log_volume(self) -> float:
        return log_ball_volume(self.dim) - 0.5 * self._factor.logdet

    @property
    def volume(self) -> float:
        return math.exp(self.log_volume)

    @property
    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor L of the form (L Lᵀ = M)."""
        return self._factor.lower

    def semi_axes(self) -> np.ndarray:
        w, _ = self._factor.eigh()
        return 1.0 / np.sqrt(w)

    def scaled(self, t: float) -> "Ellipsoid":
        """Return t·E (form divided by t²)."""
        if t <= 0.0:
            raise DomainError(f"scale factor must be positive, got {t!r}")
        return Ellipsoid(self.form.scaled(1.0 / t**2), metadata=self.metadata)

    def transformed(self, T: np.ndarray) -> "Ellipsoid":
        """Return T·E, whose form is T⁻ᵀ M T⁻¹."""
        T = np.asarray(T, dtype=float)
        if T.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"expected a {self.dim}x{self.dim} matrix, got {T.shape}")
        return Ellipsoid(self.form.congruence(np.linalg.inv(T)))

    def contains_ellipsoid(self, other: "Ellipsoid", tol: float = 1e-7) -> bool:
        """True if ``other ⊆ self``, i.e. other.form − self.form is PSD."""
        diff = other.form.entries - self.form.entries
        w, _ = jacobi_eigh(diff)
        scale = max(float(np.max(np.abs(other.form.entries))), 1.0)
        return bool(w[0] >= -tol * scale)

    def __repr__(self) -> str:
        return f"Ellipsoid(dim={self.dim}, axes={np.round(self.semi_axes(), 6).tolist()})"


# ---------------------------------------------------------------------------
# Polytopes
# ---------------------------------------------------------------------------


def sign_representatives(n: int) -> np.ndarray:
    """All sign vectors in {±1}^n with first coordinate +1 (one per ± pair)."""
    if n > _MAX_SIGN_DIM:
        raise ConfigurationError(f"sign-vector lists are capped at dimension {_MAX_SIGN_DIM}")
    rows = [(1.0,) + signs for signs in itertools.product((1.0, -1.0), repeat=n - 1)]
    return np.array(rows, dtype=float)


def _canonical_rows(A: np.ndarray, decimals: int = 10) -> np.ndarray:
    """Pick one row per ± pair and drop duplicates."""
    out = []
    seen = set()
    for row in A:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row = -row
        key = tuple(np.round(row, decimals))
        if key not in seen:
            seen.add(key)
            out.append(row)
    return np.array(out)


def _check_rows(name: str, rows, dim: Optional[int]) -> np.ndarray:
    A = np.atleast_2d(np.asarray(rows, dtype=float))
    if A.ndim != 2 or A.shape[0] == 0:
        raise DomainError(f"polytope {name} must be a non-empty list of points")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"polytope {name} must be finite")
    if dim is not None and A.shape[1] != dim:
        raise DimensionMismatchError(f"polytope {name} have dimension {A.shape[1]}, expected {dim}")
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise DegenerateBodyError(f"polytope {name} do not span R^{A.shape[1]}")
    return A


class SymPolytope(SymBody):
    """
    Symmetric polytope in vertex form conv{±v_i}, facet form {|a_iᵀx| ≤ 1},
    or both.

    Lists hold one representative per ± pair. When only one representation
    is present the other oracle is an LP solved by
    :func:`mahler.numkernel.lp_solve`. Polarity swaps the two lists.
    """

    def __init__(self, vertices=None, facets=None) -> None:
        if vertices is None and facets is None:
            raise DomainError("a polytope needs vertices or facets")
        V = _check_rows("vertices", vertices, None) if vertices is not None else None
        A = _check_rows("facets", facets, None if V is None else V.shape[1]) if facets is not None else None
        super().__init__((V if V is not None else A).shape[1])
        if V is not None and A is not None:
            values = np.max(np.abs(V @ A.T), axis=1)
            if np.any(np.abs(values - 1.0) > _TIGHT_TOL):
                raise DomainError(
                    "vertex and facet representations disagree "
                    f"(max |a·v| per vertex ranges over [{values.min():.3g}, {values.max():.3g}])"
                )
        self._vertices = V
        self._facets = A

    @classmethod
    def random(cls, dim: int, count: int, seed: int = 0) -> "SymPolytope":
        """conv{±v_i} for ``count`` standard Gaussian points."""
        rng = np.random.default_rng(seed)
        return cls(vertices=rng.standard_normal((count, dim)))

    @property
    def vertices(self) -> Optional[np.ndarray]:
        return self._vertices

    @property
    def facets(self) -> Optional[np.ndarray]:
        return self._facets

    def gauges(self, X: np.ndarray) -> np.ndarray:
        X = self._as_points(X)
        if self.facets is not None:
            return np.max(np.abs(X @ self.facets.T), axis=1)
        return np.array([_lp_dual_norm(self.vertices, x) for x in X])

    def supports(self, Y: np.ndarray) -> np.ndarray:
        Y = self._as_points(Y)
        if self.vertices is not None:
            return np.max(np.abs(Y @ self.vertices.T), axis=1)
        return np.array([_lp_dual_norm(self.facets, y) for y in Y])

    def polar(self) -> "SymPolytope":
        return SymPolytope(vertices=self.facets, facets=self.vertices)

    def with_hull_facets(self) -> "SymPolytope":
        """
        Complete a vertex-only polytope with its facets.

        Uses ``scipy.spatial.ConvexHull`` on ±vertices; only dimensions ≤ 3.
        """
        if self.facets is not None:
            return self
        if self.dim > 3:
            raise ConfigurationError("facet enumeration is only supported in dimension <= 3")
        V = self.vertices
        if self.dim == 1:
            return SymPolytope(
                vertices=[[float(np.max(np.abs(V)))]],
                facets=[[1.0 / float(np.max(np.abs(V)))]],
            )
        from scipy.spatial import ConvexHull

        hull = ConvexHull(np.vstack([V, -V]))
        # equations rows are (normal, offset) with normal·x + offset <= 0.
        normals = hull.equations[:, :-1] / (-hull.equations[:, -1:])
        facets = _canonical_rows(normals)
        extreme = _canonical_rows(np.vstack([V, -V])[hull.vertices])
        return SymPolytope(vertices=extreme, facets=facets)

    def describe(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"type": "polytope"}
        if self.vertices is not None:
            doc["vertices"] = self.vertices.tolist()
        if self.facets is not None:
            doc["facets"] = self.facets.tolist()
        return doc

    def __repr__(self) -> str:
        nv = None if self.vertices is None else len(self.vertices)
        nf = None if self.facets is None else len(self.facets)
        return f"{type(self).__name__}(dim={self.dim}, vertices={nv}, facets={nf})"


def _lp_dual_norm(rows: np.ndarray, x: np.ndarray) -> float:
    """max ⟨x, y⟩ subject to |r_iᵀy| <= 1 for every row r_i."""
    if not np.any(x):
        return 0.0
    m = rows.shape[0]
    problem = LPProblem(x, np.vstack([rows, -rows]), np.ones(2 * m))
    result = lp_solve(problem)
    if not result.optimal:
        raise DegenerateBodyError(f"polytope LP returned status {result.status!r}")
    return max(float(result.value), 0.0)


class Cube(SymPolytope):
    """The unit cube [-1, 1]^n (ℓ_∞ ball)."""

    p = math.inf

    def __init__(self, n: int) -> None:
        SymBody.__init__(self, n)
        self._vertices = None
        self._facets = None

    @property
    def vertices(self) -> np.ndarray:
        if self._vertices is None:
            self._vertices = sign_representatives(self.dim)
        return self._vertices

    @property
    def facets(self) -> np.ndarray:
        if self._facets is None:
            self._facets = np.eye(self.dim)
        return self._facets

    def gauges(self, X: np.ndarray) -> np.ndarray:
        return np.max(np.abs(self._as_points(X)), axis=1)

    def supports(self, Y: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(self._as_points(Y)), axis=1)

    def polar(self) -> "CrossPolytope":
        return CrossPolytope(self.dim)

    def describe(self) -> Dict[str, Any]:
        return {"type": "cube", "dim": self.dim}


class CrossPolytope(SymPolytope):
    """The cross-polytope conv{±e_i} (ℓ_1 ball)."""

    p = 1.0

    def __init__(self, n: int) -> None:
        SymBody.__init__(self, n)
        self._vertices = None
        self._facets = None

    @property
    def vertices(self) -> np.ndarray:
        if self._vertices is None:
            self._vertices = np.eye(self.dim)
        return self._vertices

    @property
    def facets(self) -> np.ndarray:
        if self._facets is None:
            self._facets = sign_representatives(self.dim)
        return self._facets

    def gauges(self, X: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(self._as_points(X)), axis=1)

    def supports(self, Y: np.ndarray) -> np.ndarray:
        return np.max(np.abs(self._as_points(Y)), axis=1)

    def polar(self) -> Cube:
        return Cube(self.dim)

    def describe(self) -> Dict[str, Any]:
        return {"type": "cross", "dim": self.dim}


# ---------------------------------------------------------------------------
# l_p balls
# ---------------------------------------------------------------------------


class LpBall(SymBody):
    """Unit ℓ_p ball for 1 < p < ∞; support is the ℓ_q norm."""

    def __init__(self, p: float, n: int) -> None:
        p = float(p)
        if not (1.0 < p < math.inf):
            raise DomainError(f"LpBall needs 1 < p < inf, got {p!r}; use lp_ball() for the endpoints")
        super().__init__(n)
        self.p = p
        self.q = p / (p - 1.0)

    def gauges(self, X: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self._as_points(X), ord=self.p, axis=1)

    def supports(self, Y: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self._as_points(Y), ord=self.q, axis=1)

    def polar(self) -> SymBody:
        return lp_ball(self.q, self.dim)

    def describe(self) -> Dict[str, Any]:
        return {"type": "lp_ball", "p": self.p, "dim": self.dim}

    def __repr__(self) -> str:
        return f"LpBall(p={self.p:g}, dim={self.dim})"


def lp_ball(p: float, n: int) -> SymBody:
    """
    Canonical unit ℓ_p ball.

    p = 1 gives :class:`CrossPolytope`, p = ∞ gives :class:`Cube`, p = 2 gives
    the Euclidean :class:`Ellipsoid`, anything else an :class:`LpBall`.
    """
    p = float(p)
    if p < 1.0 or math.isnan(p):
        raise DomainError(f"p must lie in [1, inf], got {p!r}")
    if p == 1.0:
        return CrossPolytope(n)
    if math.isinf(p):
        return Cube(n)
    if p == 2.0:
        return Ellipsoid.ball(n)
    return LpBall(p, n)
