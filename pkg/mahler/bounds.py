"""
Mahler volume products and lower/upper bounds.

The normalized volume product of a symmetric body K in R^n is

    s(K) = Vol K · Vol K° / b_n²,

which is at most 1 (Santaló, equality for ellipsoids). Lower bounds:

* sandwich bound: (2 log₂ r)^{-n} when E₁ ⊆ K ⊆ E₂ with (Vol E₂/Vol E₁) = r^n, r ≥ 2;
* direct bound: r^{-n} for any r ≥ 1;
* dimension bound: (log₂ n)^{-n} for n ≥ 4 (the sandwich bound at r = √n).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from mahler.bodies.base import SymBody
from mahler.errors import DomainError
from mahler.numkernel.special import log_ball_volume
from mahler.sampling import derive_seed
from mahler.volume import Z95, VolumeEstimate, volume

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundQuery:
    """Sandwich ratio ``r`` in dimension ``n``, with an optional comparison constant."""

    r: float
    n: int
    c_bm: Optional[float] = None

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and self.n >= 1):
            raise DomainError(f"dimension must be a positive integer, got {self.n!r}")
        if not self.r >= 1.0:
            raise DomainError(f"sandwich ratio must be >= 1, got {self.r!r}")
        if self.c_bm is not None and not self.c_bm > 0.0:
            raise DomainError(f"comparison constant must be positive, got {self.c_bm!r}")


def log_sandwich_bound(q: BoundQuery) -> float:
    if q.r < 2.0:
        raise DomainError(f"the sandwich bound needs r >= 2 (got r = {q.r:.6g}); use direct_bound")
    return -q.n * math.log(2.0 * math.log2(q.r))


def sandwich_bound(q: BoundQuery) -> float:
    """(2 log₂ r)^{-n}, evaluated in log space."""
    return math.exp(log_sandwich_bound(q))


def log_corollary_bound(n: int) -> float:
    if int(n) != n or n < 4:
        raise DomainError(f"the dimension bound needs n >= 4, got {n!r}")
    return -n * math.log(math.log2(n))


def corollary_bound(n: int) -> float:
    """(log₂ n)^{-n} for n ≥ 4."""
    return math.exp(log_corollary_bound(n))


def direct_bound(q: BoundQuery) -> float:
    """r^{-n}: E₂° ⊆ K° and E₁ ⊆ K give s(K) ≥ s(E₁)·r^{-n} = r^{-n}."""
    return math.exp(-q.n * math.log(q.r))


def bm_line(c: float, n: int) -> float:
    """C^{-n}, a user-supplied comparison line."""
    if not c > 0.0:
        raise DomainError(f"comparison constant must be positive, got {c!r}")
    return math.exp(-n * math.log(c))


# ---------------------------------------------------------------------------
# Step records
# ---------------------------------------------------------------------------


@dataclass
class StepRecord:
    """
    One verified identity or inequality.

    kind:
        "identity" (|lhs − rhs| ≤ tolerance, an absolute slack built from
        a relative and a statistical part),
        "inequality" (lhs ≥ rhs − tolerance), or "note" (always passes).
    ci:
        Combined statistical slack already included in ``tolerance``.
    """

    name: str
    kind: str
    measured_lhs: float
    measured_rhs: float
    tolerance: float
    passed: bool
    ci: float = 0.0
    level: int = 0
    note: str = ""


def identity_record(
    name: str,
    lhs: float,
    rhs: float,
    rtol: float,
    atol: float = 0.0,
    ci: float = 0.0,
    level: int = 0,
    note: str = "",
) -> StepRecord:
    slack = rtol * max(abs(lhs), abs(rhs)) + atol + ci
    return StepRecord(
        name=name,
        kind="identity",
        measured_lhs=float(lhs),
        measured_rhs=float(rhs),
        tolerance=slack,
        passed=bool(abs(lhs - rhs) <= slack),
        ci=ci,
        level=level,
        note=note,
    )


def inequality_record(
    name: str,
    lhs: float,
    rhs: float,
    tolerance: float = 0.0,
    ci: float = 0.0,
    level: int = 0,
    note: str = "",
) -> StepRecord:
    slack = tolerance + ci
    return StepRecord(
        name=name,
        kind="inequality",
        measured_lhs=float(lhs),
        measured_rhs=float(rhs),
        tolerance=slack,
        passed=bool(lhs >= rhs - slack),
        ci=ci,
        level=level,
        note=note,
    )


def note_record(name: str, note: str, level: int = 0, lhs: float = math.nan, rhs: float = math.nan) -> StepRecord:
    return StepRecord(
        name=name, kind="note", measured_lhs=lhs, measured_rhs=rhs, tolerance=0.0, passed=True, level=level, note=note
    )


# ---------------------------------------------------------------------------
# Volume product
# ---------------------------------------------------------------------------


@dataclass
class ProductRatio:
    """
    s(K) = Vol K · Vol K° / b_n² with its 95% half-width.
    """

    s: float
    ci: float
    volume_body: VolumeEstimate
    volume_polar: VolumeEstimate
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def sigma(self) -> float:
        return self.ci / Z95


def volume_product_ratio(
    K: SymBody,
    samples: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
    force_mc: bool = False,
) -> ProductRatio:
    """
    Normalized volume product s(K).

    Exact volumes are used when both K and K° have closed forms; otherwise
    each missing volume is estimated by Monte Carlo in a Löwner envelope of
    the body concerned, with seeds derived from ``seed``. The half-width adds
    the relative half-widths of the two volumes (first order).
    """
    P = K.polar()
    vk = volume(K, samples=samples, seed=derive_seed(seed, "body"), force_mc=force_mc, workers=workers)
    vp = volume(P, samples=samples, seed=derive_seed(seed, "polar"), force_mc=force_mc, workers=workers)
    log_b = log_ball_volume(K.dim)
    s = vk.value * vp.value / math.exp(2.0 * log_b)
    rel = (vk.relative_half_width if not vk.is_exact else 0.0) + (
        vp.relative_half_width if not vp.is_exact else 0.0
    )
    ci = s * rel if math.isfinite(rel) else math.inf
    return ProductRatio(s=s, ci=ci, volume_body=vk, volume_polar=vp)


def santalo_check(
    K: SymBody,
    samples: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
    ratio: Optional[ProductRatio] = None,
) -> StepRecord:
    """
    s(K) ≤ 1 + 3σ, recorded as the inequality 1 ≥ s(K) − 3σ.

    A failure points at a volume or polarity bug, since the inequality is a
    theorem.
    """
    if ratio is None:
        ratio = volume_product_ratio(K, samples=samples, seed=seed, workers=workers)
    return inequality_record(
        "santalo",
        lhs=1.0,
        rhs=ratio.s,
        tolerance=1e-9,
        ci=3.0 * ratio.sigma,
        note="s(K) <= 1",
    )
