"""
Certified verification of the sandwich-ratio induction.

Given E₁ ⊆ K ⊆ E₂ with ratio r, one step of the induction

1. builds the F-ellipsoid whose inner product identifies V with V* so that
   E₂° becomes E₁;
2. pulls K° back into V through that identification (``Kp``);
3. forms C = S(K ×₂ Kp) for the shear S(x, y) = (x, x + y), whose central
   slice is K ∩₂ Kp and whose projection is K +₂ Kp;
4. relates Vol K · Vol Kp to Vol C (product formula, det S = 1);
5. bounds Vol C below by the slice and projection volumes;
6. checks ‖x‖_K² + ‖x‖_{Kp}² ≥ 2‖x‖_F² pointwise;
7. checks (1/√2)F ⊇ K ∩₂ Kp ⊇ (1/√2)E₁;
8. hands K ∩₂ Kp to the next level with certificate ((1/√2)E₁, (1/√2)F),
   whose ratio is √r.

Each check produces a :class:`~mahler.bounds.StepRecord`; failures are
recorded, never raised, so a report localizes the first broken link.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from mahler.bodies.base import SymBody
from mahler.bodies.families import Ellipsoid
from mahler.bodies.oracles import check_containment, sphere_directions
from mahler.bounds import (
    BoundQuery,
    ProductRatio,
    StepRecord,
    corollary_bound,
    direct_bound,
    identity_record,
    inequality_record,
    note_record,
    sandwich_bound,
    volume_product_ratio,
)
from mahler.config import Settings, get_settings
from mahler.ellipsoids import SandwichCertificate, f_ellipsoid, john_sandwich
from mahler.errors import ChainError, ConfigurationError
from mahler.numkernel.special import frac_binom
from mahler.ops import cap_p, linear_image, shear_product, sum_p
from mahler.sampling import derive_seed, stream
from mahler.volume import Z95, VolumeEstimate, product_volume, volume_exact, volume_mc

LOG = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)


def identify_polar(K: SymBody, F: Ellipsoid) -> SymBody:
    """
    K° pulled back into V by the F inner product ⟨x, y⟩_F = xᵀQy.

    The result is {x : h_K(Qx) ≤ 1}: gauge h_K(Qx), support g_K(Q⁻¹y), and
    volume Vol K° / det Q.
    """
    Q = F.form.entries
    return linear_image(np.linalg.inv(Q), K.polar())


@dataclass
class LevelTrace:
    """Bookkeeping for one induction level."""

    level: int
    r: float
    n: int
    accumulated_factor: float


@dataclass
class StepOutcome:
    """
    Result of :func:`verify_chain_step`.

    recurse:
        False when r ≤ 4 (base case) or r < 2 (the sandwich bound does not
        apply); ``note`` says which.
    """

    level: int
    ratio_r: float
    records: List[StepRecord]
    next_body: SymBody
    next_cert: SandwichCertificate
    recurse: bool
    note: str = ""
    volumes: Dict[str, VolumeEstimate] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.records)


@dataclass
class ChainReport:
    """
    Full verification of a body against the sandwich bound.

    final_bound:
        (2 log₂ r₀)^{-n} when r₀ ≥ 2, otherwise r₀^{-n}.
    telescoped_bound:
        2^{-n·levels} · r_final^{-n}, the bound the levels actually deliver.
    """

    dim: int
    initial_ratio: float
    steps: List[StepRecord]
    recursion_trace: List[LevelTrace]
    final_bound: float
    telescoped_bound: float
    measured_product_ratio: float
    product_ratio_ci: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.steps)

    @property
    def levels(self) -> int:
        return len(self.recursion_trace) - 1


def _volume(
    K: SymBody,
    envelope: Ellipsoid,
    samples: int,
    seed: int,
    label: str,
    workers: int,
    force_mc: bool = False,
) -> VolumeEstimate:
    if not force_mc:
        exact = volume_exact(K)
        if exact is not None:
            return exact
    return volume_mc(K, envelope, samples=samples, seed=derive_seed(seed, label), workers=workers)


def _containment_record(name: str, inner: SymBody, outer: SymBody, D: np.ndarray, tol: float, level: int) -> StepRecord:
    check = check_containment(inner, outer, D, tol=tol)
    # worst_ratio <= 1 + tol  <=>  1 >= worst_ratio − tol
    return inequality_record(
        name,
        lhs=1.0,
        rhs=check.worst_ratio,
        tolerance=tol,
        level=level,
        note=f"{D.shape[0]} directions via {check.via}",
    )


def verify_chain_step(
    K: SymBody,
    cert: SandwichCertificate,
    samples: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
    level: int = 0,
    settings: Optional[Settings] = None,
) -> StepOutcome:
    """
    Verify one induction step for K with certificate (E₁, E₂).

    Every check (1)–(8) is run and recorded. ``recurse`` is set only when
    r > 4, i.e. when the caller should continue with the returned body and
    certificate.
    """
    settings = settings or get_settings()
    samples = settings.samples if samples is None else samples
    workers = settings.workers if workers is None else workers
    n = K.dim
    E1, E2 = cert.inner, cert.outer
    r = cert.ratio_r
    records: List[StepRecord] = []
    volumes: Dict[str, VolumeEstimate] = {}
    rng = stream(derive_seed(seed, "points"), level)
    D = sphere_directions(n, settings.containment_directions, seed=level)
    LOG.info("chain level %d: n=%d, r=%.9g", level, n, r)

    # (1) F-ellipsoid and its volume relation.
    F = f_ellipsoid(E1, E2)
    records.append(
        inequality_record(
            "f_geometric_mean_residual",
            1e-10,
            float(F.metadata["residual"]),
            level=level,
            note="|Q M^-1 Q - N| / |N| <= 1e-10",
        )
    )
    records.append(
        identity_record(
            "f_volume_relation",
            F.log_volume - E1.log_volume,
            0.5 * (E2.log_volume - E1.log_volume),
            rtol=settings.volume_identity_tol,
            atol=settings.volume_identity_tol,
            level=level,
            note="log Vol F - log Vol E1 = (log Vol E2 - log Vol E1)/2",
        )
    )

    # (2) Transported polar and its sandwich E1 ⊆ Kp ⊆ E2.
    Kp = identify_polar(K, F)
    records.append(_containment_record("polar_contains_inner", E1, Kp, D, settings.containment_tol, level))
    records.append(_containment_record("polar_within_outer", Kp, E2, D, settings.containment_tol, level))

    # (3) Shear body: slice and projection identities.
    C = shear_product(K, Kp)
    L = cap_p(2, K, Kp)
    S2 = sum_p(2, K, Kp)
    X = rng.standard_normal((settings.identity_points, n))
    zeros = np.zeros_like(X)
    g_slice = C.gauges(np.hstack([X, zeros]))
    g_formula = np.hypot(K.gauges(X), Kp.gauges(X))
    g_cap = L.gauges(X)
    slice_err = max(
        float(np.max(np.abs(g_slice - g_cap) / g_cap)),
        float(np.max(np.abs(g_cap - g_formula) / g_formula)),
    )
    records.append(
        inequality_record(
            "slice_identity",
            settings.identity_tol,
            slice_err,
            level=level,
            note="max relative gap between gauge of C at (x, 0), gauge of K cap_2 Kp and (|x|_K^2 + |x|_Kp^2)^(1/2)",
        )
    )
    h_proj = C.supports(np.hstack([zeros, X]))
    h_sum = S2.supports(X)
    records.append(
        inequality_record(
            "projection_identity",
            settings.identity_tol,
            float(np.max(np.abs(h_proj - h_sum) / h_sum)),
            level=level,
            note="max relative gap between support of C at (0, y) and support of K sum_2 Kp at y",
        )
    )

    # (4) Vol K · Vol Kp = binom(n, n/2) · Vol C.
    binom_n = frac_binom(n, n / 2.0)
    vk = _volume(K, E2, samples, seed, f"level{level}:K", workers)
    vkp = _volume(Kp, E2, samples, seed, f"level{level}:Kp", workers)
    volumes.update({"K": vk, "Kp": vkp})
    env_C = linear_image(C.matrix, Ellipsoid(np.kron(np.eye(2), E2.form.entries)))
    vol_c_exact = volume_exact(C)
    if vol_c_exact is not None and vk.is_exact and vkp.is_exact:
        records.append(
            identity_record(
                "product_volume_identity",
                vk.value * vkp.value,
                binom_n * vol_c_exact.value,
                rtol=settings.volume_identity_tol,
                level=level,
                note="exact volumes, det S = 1",
            )
        )
        vol_c = vol_c_exact
    else:
        predicted = product_volume(vk.value, n, vkp.value, n, 2.0)
        vol_c = VolumeEstimate(
            value=predicted,
            half_width_95=predicted * (vk.relative_half_width + vkp.relative_half_width),
            method="monte-carlo",
            samples=vk.samples,
            metadata={"from": "product formula"},
        )
        records.append(note_record("product_volume_identity", "volumes of K and Kp are estimates; see the cross-check", level))
    if 2 * n <= settings.mc_cross_check_max_dim:
        vc_mc = volume_mc(C, env_C, samples=samples, seed=derive_seed(seed, f"level{level}:C"), workers=workers)
        volumes["C_mc"] = vc_mc
        rhs = vk.value * vkp.value
        sigma = math.hypot(binom_n * vc_mc.sigma, rhs * (vk.relative_half_width + vkp.relative_half_width) / Z95)
        records.append(
            identity_record(
                "product_volume_mc",
                binom_n * vc_mc.value,
                rhs,
                rtol=0.0,
                ci=3.0 * sigma,
                level=level,
                note="Monte Carlo volume of C in the product space",
            )
        )
        if not vol_c.is_exact:
            vol_c = vc_mc
    volumes["C"] = vol_c

    # (5) Vol C ≥ Vol(K ∩₂ Kp) · Vol(K +₂ Kp) / binom(2n, n).
    v_cap = volume_mc(L, F.scaled(1.0 / _SQRT2), samples=samples, seed=derive_seed(seed, f"level{level}:cap"), workers=workers)
    v_sum = volume_mc(S2, E2.scaled(_SQRT2), samples=samples, seed=derive_seed(seed, f"level{level}:sum"), workers=workers)
    volumes.update({"cap": v_cap, "sum": v_sum})
    binom_2n = frac_binom(2 * n, n)
    rhs = v_cap.value * v_sum.value / binom_2n
    sigma = math.hypot(vol_c.sigma, rhs * (v_cap.relative_half_width + v_sum.relative_half_width) / Z95)
    records.append(
        inequality_record(
            "slice_projection_inequality",
            vol_c.value,
            rhs,
            ci=3.0 * sigma,
            level=level,
            note="Vol C >= Vol(cap) Vol(sum) / binom(2n, n); strictness is not certified",
        )
    )

    # (6) ‖x‖_K² + ‖x‖_Kp² ≥ 2‖x‖_F².
    Y = rng.standard_normal((settings.pointwise_samples, n))
    lhs_pw = K.gauges(Y) ** 2 + Kp.gauges(Y) ** 2
    rhs_pw = 2.0 * F.gauges(Y) ** 2
    worst = float(np.min(lhs_pw / rhs_pw))
    records.append(
        inequality_record(
            "pointwise_f_bound",
            worst,
            1.0 - 1e-9,
            level=level,
            note="min over samples of (|x|_K^2 + |x|_Kp^2) / (2 |x|_F^2)",
        )
    )

    # (7) (1/√2)F ⊇ K ∩₂ Kp ⊇ (1/√2)E₁.
    inner_next = E1.scaled(1.0 / _SQRT2)
    outer_next = F.scaled(1.0 / _SQRT2)
    records.append(_containment_record("cap_within_scaled_f", L, outer_next, D, settings.containment_tol, level))
    records.append(_containment_record("cap_contains_scaled_inner", inner_next, L, D, settings.containment_tol, level))

    # (8) Next certificate with ratio √r.
    next_cert = SandwichCertificate.from_pair(inner_next, outer_next, source=f"level {level}")
    records.append(
        identity_record(
            "ratio_square_root",
            next_cert.ratio_r,
            math.sqrt(r),
            rtol=settings.volume_identity_tol,
            level=level,
        )
    )

    if r < 2.0:
        recurse, note = False, f"r = {r:.6g} < 2: the sandwich bound does not apply, use the direct bound"
    elif r <= 4.0:
        recurse, note = False, f"r = {r:.6g} <= 4: base case, r^-n >= (2 log2 r)^-n"
    else:
        recurse, note = True, f"r = {r:.6g} > 4: continue with K cap_2 Kp at ratio {math.sqrt(r):.6g}"
    records.append(note_record("routing", note, level))
    for rec in records:
        if not rec.passed:
            LOG.warning("chain level %d: check %s failed (lhs=%.9g, rhs=%.9g)", level, rec.name, rec.measured_lhs, rec.measured_rhs)
    return StepOutcome(
        level=level,
        ratio_r=r,
        records=records,
        next_body=L,
        next_cert=next_cert,
        recurse=recurse,
        note=note,
        volumes=volumes,
    )


def default_certificate(K: SymBody, seed: int = 0) -> SandwichCertificate:
    """(K, K) for ellipsoids, the John sandwich otherwise."""
    if isinstance(K, Ellipsoid):
        return SandwichCertificate.from_pair(K, K, source="ellipsoid")
    return john_sandwich(K, seed=seed)


def verify_chain(
    K: SymBody,
    cert: Optional[SandwichCertificate] = None,
    samples: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
    settings: Optional[Settings] = None,
    product_ratio: Optional[ProductRatio] = None,
) -> ChainReport:
    """
    Run the induction from (K, cert) down to the base case r ≤ 4.

    Raises
    ------
    ConfigurationError
        If K's dimension exceeds ``Settings.max_chain_dim``.
    ChainError
        If the recursion exceeds ``Settings.max_chain_levels`` levels.
    """
    settings = settings or get_settings()
    n = K.dim
    if n > settings.max_chain_dim:
        raise ConfigurationError(
            f"chain verification is limited to dimension <= {settings.max_chain_dim} (got {n})"
        )
    if cert is None:
        cert = default_certificate(K, seed=seed)
    r0 = cert.ratio_r
    steps: List[StepRecord] = []
    trace = [LevelTrace(level=0, r=r0, n=n, accumulated_factor=1.0)]

    body, current = K, cert
    level = 0
    factor = 1.0
    while current.ratio_r > 4.0:
        if level >= settings.max_chain_levels:
            raise ChainError(f"chain exceeded {settings.max_chain_levels} levels (r0 = {r0:.6g})")
        outcome = verify_chain_step(
            body, current, samples=samples, seed=derive_seed(seed, f"level{level}"), workers=workers, level=level, settings=settings
        )
        steps.extend(outcome.records)
        body, current = outcome.next_body, outcome.next_cert
        level += 1
        factor *= 2.0 ** (-n)
        trace.append(LevelTrace(level=level, r=current.ratio_r, n=n, accumulated_factor=factor))

    r_final = current.ratio_r
    if r_final >= 2.0:
        steps.append(
            inequality_record(
                "base_case",
                2.0 * math.log2(r_final),
                r_final,
                tolerance=1e-12,
                level=level,
                note="r <= 2 log2 r on [2, 4]",
            )
        )
    else:
        steps.append(note_record("base_case", f"r = {r_final:.6g} < 2: direct bound r^-n", level))

    final_bound = sandwich_bound(BoundQuery(r=r0, n=n)) if r0 >= 2.0 else direct_bound(BoundQuery(r=max(r0, 1.0), n=n))
    telescoped = factor * direct_bound(BoundQuery(r=max(r_final, 1.0), n=n))
    metadata: Dict[str, Any] = {}
    if telescoped > final_bound * (1.0 + 1e-12):
        metadata["telescoped_gap"] = telescoped / final_bound
    steps.append(
        inequality_record(
            "telescoped_dominates_closed_form",
            telescoped,
            final_bound,
            tolerance=1e-12 * final_bound,
            level=level,
        )
    )

    ratio = product_ratio or volume_product_ratio(K, samples=samples, seed=derive_seed(seed, "product"), workers=workers)
    three_sigma = 3.0 * ratio.sigma
    steps.append(
        inequality_record("measured_above_bound", ratio.s, final_bound, tolerance=1e-12, ci=three_sigma, level=level)
    )
    if n >= 4:
        steps.append(
            inequality_record(
                "measured_above_dimension_bound", ratio.s, corollary_bound(n), tolerance=1e-12, ci=three_sigma, level=level
            )
        )
    steps.append(inequality_record("santalo", 1.0, ratio.s, tolerance=1e-9, ci=three_sigma, level=level))

    report = ChainReport(
        dim=n,
        initial_ratio=r0,
        steps=steps,
        recursion_trace=trace,
        final_bound=final_bound,
        telescoped_bound=telescoped,
        measured_product_ratio=ratio.s,
        product_ratio_ci=ratio.ci,
        metadata=metadata,
    )
    LOG.info("chain for n=%d: %d levels, bound %.6g, s=%.6g, passed=%s", n, report.levels, final_bound, ratio.s, report.passed)
    return report
