"""
Constructions on symmetric bodies.

Composites are lazy expression trees: their oracles are composed from the
oracles of their arguments, never from a discretized boundary.

=================  ==========================  =============================
construction        gauge                       support
=================  ==========================  =============================
A ∩_p B             ℓ_p of (g_A, g_B)           numeric
A +_p B             numeric                     ℓ_q of (h_A, h_B)
A ×_p B             ℓ_p of (g_A(x), g_B(y))     ℓ_q of (h_A(u), h_B(v))
T·K                 g_K(T⁻¹x)                   h_K(Tᵀy)
=================  ==========================  =============================

with 1/p + 1/q = 1. Polarity maps ∩_p ↔ +_q, ×_p ↔ ×_q and T ↦ T⁻ᵀ.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np

from mahler.bodies.base import SymBody
from mahler.bodies.families import Ellipsoid
from mahler.bodies.oracles import dual_gauge_numeric, sphere_directions
from mahler.config import get_settings
from mahler.errors import DegenerateBodyError, DimensionMismatchError, DomainError

LOG = logging.getLogger(__name__)

# Points are classified in blocks of this size to bound memory.
_CHUNK = 8192
# Pattern-search rounds for the +_p membership sandwich.
_MAX_ROUNDS = 200


@dataclass(frozen=True)
class PExponent:
    """
    An exponent p ∈ [1, ∞] together with its conjugate q (1/p + 1/q = 1).
    """

    p: float
    q: float = field(init=False)

    def __post_init__(self) -> None:
        p = float(self.p)
        if math.isnan(p) or p < 1.0:
            raise DomainError(f"exponent must lie in [1, inf], got {self.p!r}")
        if p == 1.0:
            q = math.inf
        elif math.isinf(p):
            q = 1.0
        else:
            q = p / (p - 1.0)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def of(cls, p: Union["PExponent", float, str]) -> "PExponent":
        if isinstance(p, PExponent):
            return p
        if isinstance(p, str):
            p = math.inf if p.strip().lower() in ("inf", "infinity") else float(p)
        return cls(float(p))

    def conjugate(self) -> "PExponent":
        return PExponent(self.q)

    def combine(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Element-wise ℓ_p norm of the pairs (a, b)."""
        return _lp_pair(np.asarray(a, dtype=float), np.asarray(b, dtype=float), self.p)

    def combine_dual(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Element-wise ℓ_q norm of the pairs (a, b)."""
        return _lp_pair(np.asarray(a, dtype=float), np.asarray(b, dtype=float), self.q)

    def to_json(self) -> Union[float, str]:
        return "inf" if math.isinf(self.p) else self.p


def _lp_pair(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    if math.isinf(p):
        return np.maximum(a, b)
    if p == 1.0:
        return a + b
    if p == 2.0:
        return np.hypot(a, b)
    m = np.maximum(a, b)
    safe = np.where(m > 0.0, m, 1.0)
    return np.where(m > 0.0, m * ((a / safe) ** p + (b / safe) ** p) ** (1.0 / p), 0.0)


def _same_dim(A: SymBody, B: SymBody, what: str) -> None:
    if A.dim != B.dim:
        raise DimensionMismatchError(f"{what} needs equal dimensions, got {A.dim} and {B.dim}")


# ---------------------------------------------------------------------------
# p-intersection / p-sum
# ---------------------------------------------------------------------------


class CapBody(SymBody):
    """A ∩_p B: ‖x‖_C^p = ‖x‖_A^p + ‖x‖_B^p (max for p = ∞)."""

    def __init__(self, p: PExponent, A: SymBody, B: SymBody) -> None:
        _same_dim(A, B, "cap_p")
        super().__init__(A.dim)
        self.p = p
        self.A = A
        self.B = B

    @property
    def gauge_exact(self) -> bool:
        return self.A.gauge_exact and self.B.gauge_exact

    @property
    def support_exact(self) -> bool:
        return False

    def gauges(self, X: np.ndarray) -> np.ndarray:
        X = self._as_points(X)
        return self.p.combine(self.A.gauges(X), self.B.gauges(X))

    def supports(self, Y: np.ndarray) -> np.ndarray:
        Y = self._as_points(Y)
        settings = get_settings()
        return np.array(
            [
                dual_gauge_numeric(self, y, starts=settings.dual_gauge_starts, tol=settings.dual_gauge_tol)
                for y in Y
            ]
        )

    def polar(self) -> "SumBody":
        return SumBody(self.p.conjugate(), self.A.polar(), self.B.polar())

    def describe(self) -> Dict[str, Any]:
        return {"op": "cap_p", "p": self.p.to_json(), "args": [self.A.describe(), self.B.describe()]}

    def __repr__(self) -> str:
        return f"CapBody(p={self.p.p:g}, {self.A!r}, {self.B!r})"


class SumBody(SymBody):
    """
    A +_p B = {s·a + t·b : a ∈ A, b ∈ B, |s|^p + |t|^p ≤ 1}.

    The support is the ℓ_q combination of the argument supports. Gauges are
    numeric; :meth:`contains` classifies points through certified upper and
    lower gauge bounds and only falls back to the numeric gauge for points
    the bounds cannot separate from the boundary.
    """

    def __init__(self, p: PExponent, A: SymBody, B: SymBody) -> None:
        _same_dim(A, B, "sum_p")
        super().__init__(A.dim)
        self.p = p
        self.A = A
        self.B = B
        self._dirs: Optional[np.ndarray] = None
        self._dir_supports: Optional[np.ndarray] = None

    @property
    def gauge_exact(self) -> bool:
        return False

    @property
    def support_exact(self) -> bool:
        return self.A.support_exact and self.B.support_exact

    def supports(self, Y: np.ndarray) -> np.ndarray:
        Y = self._as_points(Y)
        return self.p.combine_dual(self.A.supports(Y), self.B.supports(Y))

    def gauges(self, X: np.ndarray) -> np.ndarray:
        X = self._as_points(X)
        polar = self.polar()
        settings = get_settings()
        return np.array(
            [
                dual_gauge_numeric(polar, x, starts=settings.dual_gauge_starts, tol=settings.dual_gauge_tol)
                for x in X
            ]
        )

    def polar(self) -> CapBody:
        return CapBody(self.p.conjugate(), self.A.polar(), self.B.polar())

    def describe(self) -> Dict[str, Any]:
        return {"op": "sum_p", "p": self.p.to_json(), "args": [self.A.describe(), self.B.describe()]}

    def __repr__(self) -> str:
        return f"SumBody(p={self.p.p:g}, {self.A!r}, {self.B!r})"

    # ------------------------------------------------------------------
    # Membership
    # ------------------------------------------------------------------

    def contains(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        X = self._as_points(X)
        if not self.support_exact:
            return super().contains(X, tol)
        out = np.empty(X.shape[0], dtype=bool)
        for start in range(0, X.shape[0], _CHUNK):
            out[start : start + _CHUNK] = self._classify(X[start : start + _CHUNK], 1.0 + tol)
        return out

    def _directions(self):
        if self._dirs is None:
            D = sphere_directions(self.dim, 64 * self.dim, seed=0)
            self._dirs = np.vstack([D, np.eye(self.dim)])
            self._dir_supports = self.supports(self._dirs)
        return self._dirs, self._dir_supports

    def _split_value(self, U: np.ndarray, X: np.ndarray) -> np.ndarray:
        """(g_A(u)^p + g_B(x − u)^p)^{1/p}, an upper bound on the gauge at x."""
        return self.p.combine(self.A.gauges(U), self.B.gauges(X - U))

    def _radial_split(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Best split x = s·x + (1 − s)·x along the ray, as the weight s."""
        q = self.p.q
        if math.isinf(q):
            return (a <= b).astype(float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            s = 1.0 / (1.0 + (a / b) ** q)
        return np.nan_to_num(s, nan=0.5, posinf=1.0, neginf=0.0)

    def _classify(self, X: np.ndarray, limit: float) -> np.ndarray:
        norms = np.linalg.norm(X, axis=1)
        zero = norms == 0.0
        s = np.zeros(X.shape[0])
        nz = ~zero
        s[nz] = self._radial_split(self.A.gauges(X[nz]), self.B.gauges(X[nz]))
        U = s[:, None] * X
        upper = self._split_value(U, X)

        D, hD = self._directions()
        ratios = (X @ D.T) / hD
        best = np.argmax(ratios, axis=1)
        lower = ratios[np.arange(X.shape[0]), best]
        Dbest = D[best].copy()

        inside = upper <= limit
        outside = lower > limit
        pending = np.flatnonzero(~(inside | outside))
        if pending.size:
            up, lo = self._refine(X[pending], U[pending], upper[pending], Dbest[pending], lower[pending], limit)
            inside[pending] = up <= limit
            outside[pending] = lo > limit
            still = pending[~(inside[pending] | outside[pending])]
            if still.size:
                LOG.debug("sum_p membership: %d of %d points need the numeric gauge", still.size, X.shape[0])
                inside[still] = self.gauges(X[still]) <= limit
        return inside

    def _refine(self, X, U, upper, D, lower, limit):
        """Batched coordinate pattern search tightening both gauge bounds."""
        k, n = X.shape
        scale = np.linalg.norm(X, axis=1)
        step_u = 0.25 * scale
        step_d = np.full(k, 0.25)
        active = np.ones(k, dtype=bool)
        for _ in range(_MAX_ROUNDS):
            act = np.flatnonzero(active)
            if act.size == 0:
                break
            moved_u = np.zeros(act.size, dtype=bool)
            moved_d = np.zeros(act.size, dtype=bool)
            for i in range(n):
                for sign in (1.0, -1.0):
                    Ut = U[act].copy()
                    Ut[:, i] += sign * step_u[act]
                    val = self._split_value(Ut, X[act])
                    better = val < upper[act]
                    U[act[better]] = Ut[better]
                    upper[act[better]] = val[better]
                    moved_u |= better

                    Dt = D[act].copy()
                    Dt[:, i] += sign * step_d[act]
                    Dt /= np.linalg.norm(Dt, axis=1, keepdims=True)
                    ratio = np.einsum("ij,ij->i", X[act], Dt) / self.supports(Dt)
                    better = ratio > lower[act]
                    D[act[better]] = Dt[better]
                    lower[act[better]] = ratio[better]
                    moved_d |= better
            step_u[act[~moved_u]] *= 0.5
            step_d[act[~moved_d]] *= 0.5
            decided = (upper <= limit) | (lower > limit)
            active = ~decided & ((step_u > 1e-10 * scale) | (step_d > 1e-10))
        return upper, lower


# ---------------------------------------------------------------------------
# Products and linear images
# ---------------------------------------------------------------------------


class ProductBody(SymBody):
    """A ×_p B ⊂ R^n × R^k, i.e. A +_p B with A and B in complementary subspaces."""

    def __init__(self, p: PExponent, A: SymBody, B: SymBody) -> None:
        super().__init__(A.dim + B.dim)
        self.p = p
        self.A = A
        self.B = B

    @property
    def gauge_exact(self) -> bool:
        return self.A.gauge_exact and self.B.gauge_exact

    @property
    def support_exact(self) -> bool:
        return self.A.support_exact and self.B.support_exact

    def gauges(self, X: np.ndarray) -> np.ndarray:
        X = self._as_points(X)
        n = self.A.dim
        return self.p.combine(self.A.gauges(X[:, :n]), self.B.gauges(X[:, n:]))

    def supports(self, Y: np.ndarray) -> np.ndarray:
        Y = self._as_points(Y)
        n = self.A.dim
        return self.p.combine_dual(self.A.supports(Y[:, :n]), self.B.supports(Y[:, n:]))

    def polar(self) -> "ProductBody":
        return ProductBody(self.p.conjugate(), self.A.polar(), self.B.polar())

    def describe(self) -> Dict[str, Any]:
        return {"op": "prod_p", "p": self.p.to_json(), "args": [self.A.describe(), self.B.describe()]}

    def __repr__(self) -> str:
        return f"ProductBody(p={self.p.p:g}, {self.A!r}, {self.B!r})"


class LinearImage(SymBody):
    """T·K for an invertible T: gauge g_K(T⁻¹x), support h_K(Tᵀy)."""

    def __init__(self, T: np.ndarray, K: SymBody, T_inv: Optional[np.ndarray] = None) -> None:
        T = np.asarray(T, dtype=float)
        if T.shape != (K.dim, K.dim):
            raise DimensionMismatchError(f"linear map of shape {T.shape} does not act on dimension {K.dim}")
        super().__init__(K.dim)
        sign, logdet = np.linalg.slogdet(T)
        if sign == 0.0 or not np.isfinite(logdet) or np.linalg.cond(T) > 1e14:
            raise DegenerateBodyError("linear map is singular")
        self.T = T
        self.T_inv = np.linalg.inv(T) if T_inv is None else np.asarray(T_inv, dtype=float)
        self.K = K
        self.log_abs_det = float(logdet)

    @property
    def gauge_exact(self) -> bool:
        return self.K.gauge_exact

    @property
    def support_exact(self) -> bool:
        return self.K.support_exact

    def gauges(self, X: np.ndarray) -> np.ndarray:
        return self.K.gauges(self._as_points(X) @ self.T_inv.T)

    def supports(self, Y: np.ndarray) -> np.ndarray:
        return self.K.supports(self._as_points(Y) @ self.T)

    def polar(self) -> "LinearImage":
        return LinearImage(self.T_inv.T, self.K.polar(), T_inv=self.T.T)

    def describe(self) -> Dict[str, Any]:
        return {"op": "linmap", "matrix": self.T.tolist(), "args": [self.K.describe()]}

    def __repr__(self) -> str:
        return f"LinearImage(dim={self.dim}, {self.K!r})"


class ShearImage(SymBody):
    """
    S·P for the shear S(x, y) = (x, x + y) on R^n × R^n.

    S is applied structurally (identity plus a nilpotent block), so det S = 1
    holds exactly.
    """

    def __init__(self, P: SymBody) -> None:
        if P.dim % 2:
            raise DimensionMismatchError(f"shear acts on even dimensions, got {P.dim}")
        super().__init__(P.dim)
        self.P = P
        self.half = P.dim // 2
        self.log_abs_det = 0.0

    @property
    def gauge_exact(self) -> bool:
        return self.P.gauge_exact

    @property
    def support_exact(self) -> bool:
        return self.P.support_exact

    @property
    def matrix(self) -> np.ndarray:
        n = self.half
        S = np.eye(2 * n)
        S[n:, :n] = np.eye(n)
        return S

    def gauges(self, X: np.ndarray) -> np.ndarray:
        X = self._as_points(X)
        n = self.half
        # S⁻¹(x, z) = (x, z − x)
        return self.P.gauges(np.hstack([X[:, :n], X[:, n:] - X[:, :n]]))

    def supports(self, Y: np.ndarray) -> np.ndarray:
        Y = self._as_points(Y)
        n = self.half
        # Sᵀ(u, w) = (u + w, w)
        return self.P.supports(np.hstack([Y[:, :n] + Y[:, n:], Y[:, n:]]))

    def polar(self) -> LinearImage:
        S_inv = np.linalg.inv(self.matrix)
        return LinearImage(S_inv.T, self.P.polar(), T_inv=self.matrix.T)

    def describe(self) -> Dict[str, Any]:
        return {"op": "linmap", "matrix": self.matrix.tolist(), "args": [self.P.describe()]}

    def __repr__(self) -> str:
        return f"ShearImage({self.P!r})"


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def polar(K: SymBody) -> SymBody:
    """K°: gauge and support exchanged."""
    return K.polar()


def cap_p(p, A: SymBody, B: SymBody) -> CapBody:
    return CapBody(PExponent.of(p), A, B)


def sum_p(p, A: SymBody, B: SymBody) -> SumBody:
    return SumBody(PExponent.of(p), A, B)


def prod_p(p, A: SymBody, B: SymBody) -> ProductBody:
    return ProductBody(PExponent.of(p), A, B)


def linear_image(T, K: SymBody) -> SymBody:
    """T·K; ellipsoids stay ellipsoids."""
    if isinstance(K, Ellipsoid):
        T = np.asarray(T, dtype=float)
        if T.shape != (K.dim, K.dim):
            raise DimensionMismatchError(f"linear map of shape {T.shape} does not act on dimension {K.dim}")
        if np.linalg.cond(T) > 1e14:
            raise DegenerateBodyError("linear map is singular")
        return K.transformed(T)
    return LinearImage(T, K)


def scale(K: SymBody, t: float) -> SymBody:
    """t·K for t > 0."""
    t = float(t)
    if not t > 0.0:
        raise DomainError(f"scale factor must be positive, got {t!r}")
    if isinstance(K, Ellipsoid):
        return K.scaled(t)
    return LinearImage(t * np.eye(K.dim), K, T_inv=np.eye(K.dim) / t)


def shear_product(K: SymBody, Kdual: SymBody) -> ShearImage:
    """S(K ×₂ Kdual) with S(x, y) = (x, x + y)."""
    _same_dim(K, Kdual, "shear_product")
    return ShearImage(ProductBody(PExponent(2.0), K, Kdual))
