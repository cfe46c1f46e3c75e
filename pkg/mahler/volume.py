"""
Volumes of symmetric bodies.

Exact closed forms cover ellipsoids, ℓ_p balls, ×_p products of closed-form
bodies, linear images of those, and polytopes in dimensions 1 and 2.
Everything else goes through :func:`volume_mc`, a seeded rejection sampler
inside a circumscribed ellipsoid.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Any, Dict, Optional

import numpy as np

from mahler.bodies.base import SymBody
from mahler.bodies.families import Cube, CrossPolytope, Ellipsoid, LpBall, SymPolytope
from mahler.bodies.oracles import check_containment, sphere_directions
from mahler.config import get_settings
from mahler.errors import PreconditionError
from mahler.numkernel.special import frac_binom, log_gamma
from mahler.ops import LinearImage, PExponent, ProductBody, ShearImage
from mahler.sampling import stream, uniform_ellipsoid

LOG = logging.getLogger(__name__)

# Two-sided 95% standard normal quantile.
Z95 = 1.959963984540054

# Radial margin for envelopes of bodies whose Löwner ellipsoid is sampled.
ENVELOPE_MARGIN = 1.05


@dataclass
class VolumeEstimate:
    """
    A volume with its uncertainty.

    half_width_95:
        Half-width of the 95% Wilson interval (0 for exact values).
    usable:
        False when a Monte Carlo run produced no hits.
    """

    value: float
    half_width_95: float
    method: str
    samples: int = 0
    seed: Optional[int] = None
    usable: bool = True
    hits: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def exact(cls, value: float, **metadata: Any) -> "VolumeEstimate":
        return cls(value=float(value), half_width_95=0.0, method="exact", metadata=dict(metadata))

    @property
    def is_exact(self) -> bool:
        return self.method == "exact"

    @property
    def relative_half_width(self) -> float:
        return self.half_width_95 / self.value if self.value > 0 else math.inf

    @property
    def sigma(self) -> float:
        """Standard error implied by the 95% half-width."""
        return self.half_width_95 / Z95

    def to_report(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "ci95": self.half_width_95,
            "method": self.method,
            "samples": self.samples,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def lp_ball_log_volume(n: int, p) -> float:
    p = PExponent.of(p)
    if math.isinf(p.p):
        return n * math.log(2.0)
    return n * (math.log(2.0) + log_gamma(1.0 / p.p + 1.0)) - log_gamma(n / p.p + 1.0)


def lp_ball_volume(n: int, p) -> float:
    """(2Γ(1/p + 1))^n / Γ(n/p + 1); 2^n for p = ∞."""
    return math.exp(lp_ball_log_volume(n, p))


def product_volume(vol_a: float, n: int, vol_b: float, k: int, p) -> float:
    """Vol(A ×_p B) = Vol A · Vol B / binom((n + k)/p, n/p)."""
    p = PExponent.of(p)
    if math.isinf(p.p):
        return vol_a * vol_b
    return vol_a * vol_b / frac_binom((n + k) / p.p, n / p.p)


def polygon_area(points: np.ndarray) -> float:
    """Shoelace area of the convex hull of ``points`` ordered by angle."""
    angles = np.arctan2(points[:, 1], points[:, 0])
    P = points[np.argsort(angles)]
    x, y = P[:, 0], P[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _polygon_vertices(P: SymPolytope) -> np.ndarray:
    """Extreme points of a planar symmetric polygon (both signs)."""
    from scipy.spatial import ConvexHull

    if P.vertices is not None:
        pts = np.vstack([P.vertices, -P.vertices])
    else:
        # Pairwise intersections of the lines a_i·x = ±1 that satisfy all constraints.
        A = P.facets
        rows = np.vstack([A, -A])
        candidates = []
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                G = np.vstack([rows[i], rows[j]])
                if abs(np.linalg.det(G)) < 1e-12:
                    continue
                x = np.linalg.solve(G, np.ones(2))
                if np.max(np.abs(A @ x)) <= 1.0 + 1e-9:
                    candidates.append(x)
        pts = np.array(candidates)
    hull = ConvexHull(pts)
    return pts[hull.vertices]


@singledispatch
def volume_exact(K: SymBody) -> Optional[VolumeEstimate]:
    """
    Closed-form volume, or None for bodies outside the closed-form families.
    """
    return None


@volume_exact.register
def _(K: Ellipsoid) -> Optional[VolumeEstimate]:
    return VolumeEstimate.exact(K.volume, family="ellipsoid")


@volume_exact.register
def _(K: LpBall) -> Optional[VolumeEstimate]:
    return VolumeEstimate.exact(lp_ball_volume(K.dim, K.p), family="lp_ball")


@volume_exact.register
def _(K: Cube) -> Optional[VolumeEstimate]:
    return VolumeEstimate.exact(2.0**K.dim, family="cube")


@volume_exact.register
def _(K: CrossPolytope) -> Optional[VolumeEstimate]:
    return VolumeEstimate.exact(math.exp(K.dim * math.log(2.0) - log_gamma(K.dim + 1.0)), family="cross")


@volume_exact.register
def _(K: SymPolytope) -> Optional[VolumeEstimate]:
    if K.dim == 1:
        if K.vertices is not None:
            return VolumeEstimate.exact(2.0 * float(np.max(np.abs(K.vertices))), family="segment")
        return VolumeEstimate.exact(2.0 / float(np.max(np.abs(K.facets))), family="segment")
    if K.dim == 2:
        return VolumeEstimate.exact(polygon_area(_polygon_vertices(K)), family="polygon")
    return None


@volume_exact.register
def _(K: ProductBody) -> Optional[VolumeEstimate]:
    va = volume_exact(K.A)
    vb = volume_exact(K.B)
    if va is None or vb is None:
        return None
    return VolumeEstimate.exact(product_volume(va.value, K.A.dim, vb.value, K.B.dim, K.p), family="product")


@volume_exact.register
def _(K: LinearImage) -> Optional[VolumeEstimate]:
    inner = volume_exact(K.K)
    if inner is None:
        return None
    return VolumeEstimate.exact(inner.value * math.exp(K.log_abs_det), family="linear_image")


@volume_exact.register
def _(K: ShearImage) -> Optional[VolumeEstimate]:
    inner = volume_exact(K.P)
    if inner is None:
        return None
    return VolumeEstimate.exact(inner.value, family="shear")


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def wilson_half_width(hits: int, n: int, z: float = Z95) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if n <= 0:
        return math.inf
    phat = hits / n
    denom = 1.0 + z * z / n
    return z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom


def _count_hits(K: SymBody, envelope: Ellipsoid, seed: int, index: int, count: int) -> int:
    X = uniform_ellipsoid(stream(seed, index), count, envelope)
    return int(np.count_nonzero(K.contains(X)))


def volume_mc(
    K: SymBody,
    envelope: Ellipsoid,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    shard_size: Optional[int] = None,
) -> VolumeEstimate:
    """
    Monte Carlo volume of K by rejection from a circumscribed ellipsoid.

    Parameters
    ----------
    K:
        The body; membership is ``K.contains``.
    envelope:
        Ellipsoid containing K. Checked on sampled directions first.
    samples, seed:
        Sample count and seed; the estimate is a deterministic function of
        (K, envelope, samples, seed).
    workers:
        Threads for the shards. Shard ``i`` always draws from stream
        ``(seed, i)``, and hit counts are summed as integers, so the result
        does not depend on this value.

    Raises
    ------
    PreconditionError
        If the envelope visibly fails to contain K, or if the first shard's
        acceptance is below ``Settings.min_acceptance`` in dimension above 8.
    """
    settings = get_settings()
    samples = settings.samples if samples is None else int(samples)
    seed = settings.seed if seed is None else int(seed)
    workers = settings.workers if workers is None else max(int(workers), 1)
    shard_size = settings.shard_size if shard_size is None else int(shard_size)
    if samples <= 0:
        raise PreconditionError("Monte Carlo needs a positive sample count")

    D = sphere_directions(K.dim, settings.containment_directions, seed=seed % (2**32))
    check = check_containment(K, envelope, D, tol=1e-9)
    if not check.ok:
        raise PreconditionError(
            f"envelope does not contain the body (worst {check.via} ratio {check.worst_ratio:.9g} "
            f"in direction {np.round(check.direction, 6).tolist()}); enlarge the envelope, "
            "e.g. a scaled Löwner ellipsoid"
        )

    counts = [min(shard_size, samples - start) for start in range(0, samples, shard_size)]
    first = _count_hits(K, envelope, seed, 0, counts[0])
    if K.dim > 8 and first / counts[0] < settings.min_acceptance:
        raise PreconditionError(
            f"acceptance {first / counts[0]:.2e} below {settings.min_acceptance:g} in dimension {K.dim}; "
            "use a tighter envelope"
        )
    hits = first
    if len(counts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rest = pool.map(lambda i: _count_hits(K, envelope, seed, i, counts[i]), range(1, len(counts)))
            hits += sum(rest)
    LOG.debug("volume_mc: %d/%d hits in %d shards", hits, samples, len(counts))

    vol_env = envelope.volume
    if hits == 0:
        LOG.warning("Monte Carlo volume has no hits in %d samples; estimate is unusable", samples)
        return VolumeEstimate(
            value=0.0,
            half_width_95=wilson_half_width(0, samples) * vol_env,
            method="monte-carlo",
            samples=samples,
            seed=seed,
            usable=False,
            hits=0,
        )
    return VolumeEstimate(
        value=hits / samples * vol_env,
        half_width_95=wilson_half_width(hits, samples) * vol_env,
        method="monte-carlo",
        samples=samples,
        seed=seed,
        hits=hits,
        metadata={"envelope_volume": vol_env, "acceptance": hits / samples},
    )


def envelope_for(K: SymBody, seed: int = 0) -> Ellipsoid:
    """
    A circumscribed ellipsoid for rejection sampling.

    Exact Löwner ellipsoids (ellipsoids, vertex polytopes) are used as they
    are; sampled ones are enlarged by ``ENVELOPE_MARGIN``.
    """
    from mahler.ellipsoids import loewner

    E = loewner(K, seed=seed)
    if E.metadata.get("method") == "boundary-sampled":
        return E.scaled(ENVELOPE_MARGIN)
    return E


def volume(
    K: SymBody,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    envelope: Optional[Ellipsoid] = None,
    force_mc: bool = False,
    workers: Optional[int] = None,
) -> VolumeEstimate:
    """Exact volume when available (unless ``force_mc``), otherwise Monte Carlo."""
    if not force_mc:
        exact = volume_exact(K)
        if exact is not None:
            return exact
    if envelope is None:
        envelope = envelope_for(K)
    return volume_mc(K, envelope, samples=samples, seed=seed, workers=workers)
