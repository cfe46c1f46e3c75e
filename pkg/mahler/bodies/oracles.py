"""
Oracle entry points and direction helpers.

``gauge`` and ``support`` are thin dimension-checked wrappers over the body
methods. ``dual_gauge_numeric`` evaluates the support function of a body that
only exposes a gauge, through the convex reformulation

    h_K(y) = |y| / min { ‖x‖_K : ⟨x, ŷ⟩ = 1 },

i.e. the supporting hyperplane orthogonal to y touches K at the point of the
hyperplane ⟨x, ŷ⟩ = 1 with least gauge. The objective is convex on the
hyperplane, so every local minimum is global; multi-start Nelder–Mead guards
against stalls on the kinks of polyhedral gauges.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import optimize, stats
from scipy.stats import qmc

from mahler.bodies.base import SymBody
from mahler.errors import DimensionMismatchError

LOG = logging.getLogger(__name__)


def _vector(K: SymBody, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (K.dim,):
        raise DimensionMismatchError(f"expected a vector of dimension {K.dim}, got shape {x.shape}")
    return x


def gauge(K: SymBody, x) -> float:
    """‖x‖_K, the least t > 0 with x/t ∈ K."""
    return float(K.gauges(_vector(K, x)[None, :])[0])


def support(K: SymBody, y) -> float:
    """h_K(y) = sup over x ∈ K of ⟨x, y⟩."""
    return float(K.supports(_vector(K, y)[None, :])[0])


# ---------------------------------------------------------------------------
# Numeric dual gauge
# ---------------------------------------------------------------------------


@dataclass
class SupportEstimate:
    """
    Result of :func:`support_estimate`.

    value:
        Estimated h_K(y).
    converged:
        False when the best run hit the iteration cap.
    spread:
        Relative spread between the best and worst converged starts.
    """

    value: float
    converged: bool
    spread: float = 0.0
    starts_used: int = 0
    metadata: Dict[str, str] = field(default_factory=dict)


def _hyperplane_basis(yhat: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the complement of ``yhat``."""
    n = yhat.shape[0]
    q, _ = np.linalg.qr(np.column_stack([yhat, np.eye(n)]))
    return q[:, 1:n]


def support_estimate(
    K: SymBody,
    y,
    starts: int = 16,
    tol: float = 1e-8,
    seed: int = 0,
    max_iter: int = 4000,
) -> SupportEstimate:
    """
    Estimate h_K(y) from the gauge oracle alone.

    Parameters
    ----------
    K:
        Body with a gauge oracle.
    y:
        Direction (any length); h_K(0) = 0.
    starts:
        Maximum number of starting points on the hyperplane ⟨x, ŷ⟩ = 1.
        The first start is ŷ itself; the rest are seeded random unit vectors
        projected onto the hyperplane. Starts stop early once three runs agree
        to ``tol``.
    tol:
        Relative tolerance on the minimal gauge.
    seed:
        Seed for the random starts.
    """
    y = _vector(K, y)
    norm_y = float(np.linalg.norm(y))
    if norm_y == 0.0:
        return SupportEstimate(value=0.0, converged=True)
    yhat = y / norm_y
    n = K.dim
    if n == 1:
        g = float(K.gauges(yhat[None, :])[0])
        return SupportEstimate(value=norm_y / g, converged=True, starts_used=1)

    B = _hyperplane_basis(yhat)

    def objective(z: np.ndarray) -> float:
        return float(K.gauges((yhat + B @ z)[None, :])[0])

    rng = np.random.default_rng(seed)
    initial = [np.zeros(n - 1)]
    while len(initial) < starts:
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        dot = float(u @ yhat)
        if abs(dot) < 0.2:
            continue
        u = u / dot
        initial.append(B.T @ u)

    options = {"xatol": tol, "fatol": tol * 1e-2, "maxiter": max_iter, "adaptive": True}
    runs = []
    converged = []
    for z0 in initial:
        res = optimize.minimize(objective, z0, method="Nelder-Mead", options=options)
        # Restart from the optimum to escape simplex collapse on kinks.
        for _ in range(3):
            again = optimize.minimize(objective, res.x, method="Nelder-Mead", options=options)
            improved = res.fun - again.fun
            res = again if again.fun < res.fun else res
            if improved <= tol * max(abs(res.fun), 1e-300):
                break
        runs.append(float(res.fun))
        converged.append(bool(res.success))
        if len(runs) >= 3:
            best3 = sorted(runs)[:3]
            if best3[2] - best3[0] <= tol * best3[0]:
                break

    best = int(np.argmin(runs))
    gmin = runs[best]
    spread = (max(runs) - gmin) / gmin if gmin > 0 else 0.0
    if not converged[best]:
        LOG.warning("numeric support did not converge at y=%s (spread %.2e)", np.round(y, 6), spread)
    return SupportEstimate(
        value=norm_y / gmin,
        converged=converged[best],
        spread=spread,
        starts_used=len(runs),
        metadata={"method": "hyperplane-min"},
    )


def dual_gauge_numeric(
    K: SymBody,
    y,
    starts: int = 16,
    tol: float = 1e-8,
    seed: int = 0,
) -> float:
    """
    Numeric support h_K(y) (= ‖y‖_{K°}) from the gauge oracle of K.

    See :func:`support_estimate` for the algorithm and the convergence flag.
    """
    return support_estimate(K, y, starts=starts, tol=tol, seed=seed).value


# ---------------------------------------------------------------------------
# Directions
# ---------------------------------------------------------------------------


def sphere_directions(n: int, count: int, seed: Optional[int] = 0) -> np.ndarray:
    """
    Quasi-uniform unit vectors in R^n.

    A scrambled Halton sequence is pushed through the Gaussian quantile
    function and normalized, which spreads points more evenly than i.i.d.
    Gaussian draws at the sample sizes used for containment checks.
    """
    u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    z = stats.norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return z / norms


# ---------------------------------------------------------------------------
# Sampled containment
# ---------------------------------------------------------------------------


@dataclass
class ContainmentCheck:
    """
    Outcome of :func:`check_containment`.

    worst_ratio:
        Largest observed ratio (outer gauge / inner gauge, or inner support /
        outer support); containment holds on the sample iff it is <= 1 + tol.
    direction:
        The direction attaining ``worst_ratio``.
    """

    ok: bool
    worst_ratio: float
    direction: np.ndarray
    via: str
    tolerance: float


def check_containment(
    inner: SymBody,
    outer: SymBody,
    directions: np.ndarray,
    tol: float = 1e-7,
) -> ContainmentCheck:
    """
    Test ``inner ⊆ outer`` on sampled directions.

    Compares gauges (g_outer ≤ g_inner) when both gauges are exact, otherwise
    supports (h_inner ≤ h_outer) when both supports are exact, and falls back
    to gauges.
    """
    if inner.dim != outer.dim:
        raise DimensionMismatchError(
            f"containment needs equal dimensions, got {inner.dim} and {outer.dim}"
        )
    D = np.atleast_2d(np.asarray(directions, dtype=float))
    use_support = not (inner.gauge_exact and outer.gauge_exact) and (
        inner.support_exact and outer.support_exact
    )
    if use_support:
        ratios = inner.supports(D) / outer.supports(D)
        via = "support"
    else:
        ratios = outer.gauges(D) / inner.gauges(D)
        via = "gauge"
    worst = int(np.argmax(ratios))
    return ContainmentCheck(
        ok=bool(ratios[worst] <= 1.0 + tol),
        worst_ratio=float(ratios[worst]),
        direction=D[worst].copy(),
        via=via,
        tolerance=tol,
    )
