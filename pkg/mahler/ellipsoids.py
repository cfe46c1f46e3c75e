"""
Löwner and John ellipsoids, sandwich certificates and the F-ellipsoid.

The minimum-volume centered enclosing ellipsoid of ±points is computed with
Khachiyan's barycentric coordinate ascent, with Todd–Yildirim away steps so
the iteration converges linearly. John ellipsoids of symmetric bodies are
obtained by polarity: J(K) = Löwner(K°)°.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from mahler.bodies.base import SymBody
from mahler.bodies.families import Ellipsoid, SymPolytope
from mahler.bodies.oracles import check_containment, sphere_directions
from mahler.config import get_settings
from mahler.errors import ContainmentError, DegenerateBodyError, DimensionMismatchError
from mahler.numkernel.linalg import SymMatrix, geometric_mean_residual, jacobi_eigh, matrix_geometric_mean

LOG = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Khachiyan
# ---------------------------------------------------------------------------


@dataclass
class MVEEResult:
    """
    Detailed output of :func:`mvee_symmetric_detailed`.

    violation:
        max_i p_iᵀ M p_i for the unscaled Khachiyan form M = X(u)⁻¹/n; the
        returned ellipsoid is rescaled so that every point lies inside.
    """

    ellipsoid: Ellipsoid
    weights: np.ndarray
    iterations: int
    violation: float
    converged: bool


def mvee_symmetric_detailed(
    points,
    eps: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> MVEEResult:
    """
    Minimum-volume centered ellipsoid containing ±points.

    Parameters
    ----------
    points:
        (m, n) array, one representative per ± pair, spanning R^n.
    eps:
        Stop once max_i p_iᵀ M p_i ≤ 1 + eps (defaults to
        ``Settings.khachiyan_eps``).
    max_iter:
        Iteration cap (defaults to ``Settings.khachiyan_max_iter``); on
        reaching it the current iterate is returned with ``converged=False``.

    Raises
    ------
    DegenerateBodyError
        If the points do not span R^n.
    """
    settings = get_settings()
    eps = settings.khachiyan_eps if eps is None else float(eps)
    max_iter = settings.khachiyan_max_iter if max_iter is None else int(max_iter)

    P = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = P.shape
    if m == 0 or np.linalg.matrix_rank(P) < n:
        raise DegenerateBodyError(f"{m} points do not span R^{n}")

    u = np.full(m, 1.0 / m)
    X = (P * u[:, None]).T @ P
    kappa = np.einsum("ij,ij->i", P @ np.linalg.inv(X), P)
    target = n * (1.0 + eps)

    iterations = 0
    converged = False
    while iterations < max_iter:
        j = int(np.argmax(kappa))
        if kappa[j] <= target:
            converged = True
            break
        support = np.flatnonzero(u > 0.0)
        k = int(support[np.argmin(kappa[support])])

        forward = kappa[j] / n - 1.0
        away = 1.0 - kappa[k] / n
        if away > forward and u[k] < 1.0:
            idx = k
            if kappa[k] <= 1.0:
                step = -u[k] / (1.0 - u[k])
            else:
                step = max((kappa[k] / n - 1.0) / (kappa[k] - 1.0), -u[k] / (1.0 - u[k]))
        else:
            idx = j
            step = (kappa[j] / n - 1.0) / (kappa[j] - 1.0)

        u *= 1.0 - step
        u[idx] += step
        if u[idx] < 1e-15:
            u[idx] = 0.0
        p = P[idx]
        X = (1.0 - step) * X + step * np.outer(p, p)
        kappa = np.einsum("ij,ij->i", P @ np.linalg.inv(X), P)
        iterations += 1

    if not converged:
        LOG.warning("Khachiyan stopped at the %d-iteration cap (max kappa/n = %.3e)", max_iter, kappa.max() / n)
    LOG.debug("Khachiyan: %d iterations, %d points, dim %d", iterations, m, n)

    M = np.linalg.inv(X) / n
    violation = float(np.max(kappa) / n)
    if violation > 1.0:
        M = M / violation
    E = Ellipsoid(
        SymMatrix(M),
        metadata={"method": "khachiyan", "iterations": iterations, "violation": violation},
    )
    return MVEEResult(ellipsoid=E, weights=u, iterations=iterations, violation=violation, converged=converged)


def mvee_symmetric(points, eps: Optional[float] = None) -> Ellipsoid:
    """Minimum-volume centered ellipsoid ⊇ ±points (see :func:`mvee_symmetric_detailed`)."""
    return mvee_symmetric_detailed(points, eps=eps).ellipsoid


# ---------------------------------------------------------------------------
# Löwner / John
# ---------------------------------------------------------------------------


def loewner(K: SymBody, boundary_samples: Optional[int] = None, seed: int = 0) -> Ellipsoid:
    """
    Centered enclosing ellipsoid of K (the Löwner ellipsoid up to sampling).

    Ellipsoids are returned unchanged and vertex polytopes get the exact MVEE
    of their vertices. Other bodies are sampled at boundary points x/‖x‖_K for
    quasi-uniform directions x; the MVEE of those points is then inflated by
    the largest gauge ratio found over the boundary sample and an independent
    check sample, and the inflation factor is recorded in the metadata.
    """
    if isinstance(K, Ellipsoid):
        return K
    if isinstance(K, SymPolytope) and K.vertices is not None:
        return mvee_symmetric(K.vertices)

    settings = get_settings()
    count = settings.boundary_samples if boundary_samples is None else int(boundary_samples)
    n = K.dim
    D = np.vstack([sphere_directions(n, count, seed=seed), np.eye(n)])
    B = D / K.gauges(D)[:, None]
    E = mvee_symmetric(B)

    check = sphere_directions(n, settings.containment_directions, seed=seed + 1)
    C = np.vstack([B, check / K.gauges(check)[:, None]])
    t = float(np.max(E.gauges(C)))
    inflation = max(t, 1.0)
    if t > 1.0:
        LOG.info("sampled Löwner ellipsoid inflated by %.6g to contain the check sample", t)
        E = E.scaled(t)
    E.metadata.update({"method": "boundary-sampled", "boundary_samples": count, "inflation": inflation})
    return E


def john(K: SymBody, seed: int = 0) -> Ellipsoid:
    """
    Inscribed ellipsoid J(K) = Löwner(K°)°, certified J ⊆ K on sampled directions.

    If the check finds J poking out of K, J is deflated by the worst ratio and
    the deflation factor recorded in the metadata.
    """
    if isinstance(K, Ellipsoid):
        return K
    settings = get_settings()
    outer_polar = loewner(K.polar(), seed=seed)
    J = outer_polar.polar()
    J.metadata.update({"method": "polar-loewner", "inflation": outer_polar.metadata.get("inflation", 1.0)})

    D = sphere_directions(K.dim, settings.containment_directions, seed=seed + 2)
    result = check_containment(J, K, D, tol=1e-12)
    if not result.ok:
        LOG.info("John ellipsoid deflated by %.6g after the containment check", result.worst_ratio)
        J = Ellipsoid(J.form.scaled(result.worst_ratio**2), metadata=dict(J.metadata, deflation=result.worst_ratio))
    return J


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass
class SandwichCertificate:
    """
    E₁ ⊆ K ⊆ E₂ with ratio r = (Vol E₂ / Vol E₁)^{1/n}.
    """

    inner: Ellipsoid
    outer: Ellipsoid
    ratio_r: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_pair(cls, inner: Ellipsoid, outer: Ellipsoid, **metadata: Any) -> "SandwichCertificate":
        if inner.dim != outer.dim:
            raise DimensionMismatchError(f"certificate ellipsoids differ in dimension: {inner.dim} vs {outer.dim}")
        r = math.exp((outer.log_volume - inner.log_volume) / inner.dim)
        return cls(inner=inner, outer=outer, ratio_r=r, metadata=dict(metadata))

    @property
    def dim(self) -> int:
        return self.inner.dim


def verify_sandwich(
    K: SymBody,
    cert: SandwichCertificate,
    directions: Optional[int] = None,
    tol: Optional[float] = None,
    seed: int = 0,
) -> None:
    """
    Check E₁ ⊆ K ⊆ E₂ on sampled directions.

    Raises
    ------
    ContainmentError
        Carrying the first violating direction.
    """
    settings = get_settings()
    count = settings.containment_directions if directions is None else directions
    tol = settings.containment_tol if tol is None else tol
    D = sphere_directions(K.dim, count, seed=seed)
    inner = check_containment(cert.inner, K, D, tol=tol)
    if not inner.ok:
        raise ContainmentError(
            f"inner ellipsoid leaves the body (ratio {inner.worst_ratio:.9g})", inner.direction
        )
    outer = check_containment(K, cert.outer, D, tol=tol)
    if not outer.ok:
        raise ContainmentError(
            f"body leaves the outer ellipsoid (ratio {outer.worst_ratio:.9g}); "
            "supply a larger E2 or let the tool compute one",
            outer.direction,
        )


def john_sandwich(K: SymBody, seed: int = 0) -> SandwichCertificate:
    """
    Certificate (J, √n·J) from the John ellipsoid, r = √n.

    The containment K ⊆ √n·J is checked on sampled directions. For an
    ellipsoid the tighter certificate (K, K) exists and is noted in the
    metadata.
    """
    n = K.dim
    J = john(K, seed=seed)
    outer = J.scaled(math.sqrt(n))
    cert = SandwichCertificate.from_pair(J, outer, source="john")
    verify_sandwich(K, cert, seed=seed + 3)
    if isinstance(K, Ellipsoid):
        cert.metadata["note"] = "body is an ellipsoid: the tighter outer ellipsoid E2 = E1 (r = 1) exists"
    return cert


def f_ellipsoid(E1: Ellipsoid, E2: Ellipsoid) -> Ellipsoid:
    """
    The F-ellipsoid of a pair E₁ ⊆ E₂.

    With E₂ = {xᵀMx ≤ 1} and E₁ = {xᵀNx ≤ 1}, F has form Q, the geometric
    mean of M and N (Q M⁻¹ Q = N). Identifying V with V* through xᵀQy maps
    E₂° onto E₁.

    Raises
    ------
    ContainmentError
        If E₁ ⊄ E₂ (N − M not positive semidefinite).
    """
    if E1.dim != E2.dim:
        raise DimensionMismatchError(f"F-ellipsoid needs equal dimensions, got {E1.dim} and {E2.dim}")
    M = E2.form
    N = E1.form
    if not E2.contains_ellipsoid(E1, tol=get_settings().containment_tol):
        w, v = jacobi_eigh(N.entries - M.entries)
        raise ContainmentError("inner ellipsoid is not contained in the outer one", v[:, 0])
    Q = matrix_geometric_mean(M, N)
    residual = geometric_mean_residual(M, N, Q)
    return Ellipsoid(Q, metadata={"method": "geometric-mean", "residual": residual})
