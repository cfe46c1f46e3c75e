# mahler/services/reports.py
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from mahler.bodies.base import SymBody
from mahler.bodies.families import Ellipsoid
from mahler.bounds import (
    BoundQuery,
    StepRecord,
    bm_line,
    corollary_bound,
    direct_bound,
    inequality_record,
    log_corollary_bound,
    note_record,
    sandwich_bound,
    santalo_check,
    volume_product_ratio,
)
from mahler.chain import default_certificate, verify_chain
from mahler.config import Settings, get_settings
from mahler.ellipsoids import SandwichCertificate, john_sandwich, loewner, mvee_symmetric_detailed, verify_sandwich
from mahler.errors import ConfigurationError
from mahler.numkernel.linalg import SymMatrix
from mahler.volume import VolumeEstimate, envelope_for, volume

LOG = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Settings fields a run may override with --tol NAME=VALUE.
TOLERANCE_FIELDS = (
    "containment_tol",
    "dual_gauge_tol",
    "identity_tol",
    "khachiyan_eps",
    "volume_identity_tol",
)


def _round12(x: float) -> Any:
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def _result_to_dict(result: Any) -> Any:
    """
    Convert results into JSON-friendly structures.

    Dataclasses become dicts field by field, bodies become their body spec,
    numpy and pandas containers become lists and records, and floats are
    rounded to 12 significant digits (NaN becomes null, infinities "inf").
    """
    if isinstance(result, VolumeEstimate):
        doc = result.to_report()
        if not result.usable:
            doc["usable"] = False
        return _result_to_dict(doc)

    if isinstance(result, SymBody):
        return _result_to_dict(result.describe())

    if isinstance(result, SymMatrix):
        return _result_to_dict(result.to_list())

    if is_dataclass(result) and not isinstance(result, type):
        return {f.name: _result_to_dict(getattr(result, f.name)) for f in fields(result)}

    if isinstance(result, pd.DataFrame):
        return _result_to_dict(result.to_dict(orient="records"))

    if isinstance(result, pd.Series):
        return _result_to_dict(result.to_dict())

    if isinstance(result, np.ndarray):
        return _result_to_dict(result.tolist())

    if isinstance(result, np.generic):
        return _result_to_dict(result.item())

    if isinstance(result, dict):
        return {str(k): _result_to_dict(v) for k, v in result.items()}

    if isinstance(result, (list, tuple)):
        return [_result_to_dict(v) for v in result]

    if isinstance(result, bool) or result is None or isinstance(result, (int, str)):
        return result

    if isinstance(result, float):
        return _round12(result)

    return str(result)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


class RunConfig(BaseModel):
    """
    Options of one CLI run.

    Defaults come from :class:`~mahler.config.Settings`. The echo embedded in
    reports leaves out ``workers`` and ``out``, which do not affect results.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default_factory=lambda: get_settings().seed, ge=0, lt=2**64)
    samples: int = Field(default_factory=lambda: get_settings().samples, gt=0)
    workers: int = Field(default_factory=lambda: get_settings().workers, ge=1)
    format: Literal["json", "csv"] = "json"
    out: Optional[str] = None
    force_mc: bool = False
    c_bm: Optional[float] = Field(default=None, gt=0)
    tolerances: Dict[str, float] = Field(default_factory=dict)

    @field_validator("tolerances")
    @classmethod
    def _known_tolerances(cls, v: Dict[str, float]) -> Dict[str, float]:
        unknown = sorted(set(v) - set(TOLERANCE_FIELDS))
        if unknown:
            raise ValueError(f"unknown tolerance(s) {unknown}; expected one of {list(TOLERANCE_FIELDS)}")
        for name, value in v.items():
            if not value >= 0.0:
                raise ValueError(f"tolerance {name} must be non-negative, got {value!r}")
        return dict(v)

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude={"workers", "out"})

    def settings(self) -> Settings:
        """Global settings with this run's tolerance overrides applied."""
        return get_settings().model_copy(update=dict(self.tolerances))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class Report:
    """
    A rendered-ready report.

    payload:
        Fields of the JSON document (besides kind, schema, config, passed).
    rows:
        Flat records for the CSV rendering.
    """

    kind: str
    payload: Dict[str, Any]
    rows: List[Dict[str, Any]]
    passed: bool = True
    metadata: Dict[str, Any] = field(default_factory=dict)


def _record_rows(records: Sequence[StepRecord]) -> List[Dict[str, Any]]:
    return [_result_to_dict(rec) for rec in records]


def render_json(report: Report, config: RunConfig) -> str:
    doc = {
        "kind": report.kind,
        "schema_version": SCHEMA_VERSION,
        "config": config.echo(),
        "passed": report.passed,
        **report.payload,
    }
    return json.dumps(_result_to_dict(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(report: Report, config: RunConfig) -> str:
    header = (
        f"# mahler-core {report.kind} schema v{SCHEMA_VERSION}\n"
        f"# config: {json.dumps(config.echo(), sort_keys=True)}\n"
    )
    frame = pd.DataFrame(_result_to_dict(report.rows))
    return header + frame.to_csv(index=False, float_format="%.12g", lineterminator="\n")


def render(report: Report, config: RunConfig) -> str:
    """Report text in the run's output format."""
    if config.format == "csv":
        return render_csv(report, config)
    return render_json(report, config)


class ReportEngine:
    """
    Service layer between the CLI and the library.

    Each method runs one kind of computation with the options of a
    :class:`RunConfig` and returns a :class:`Report`.
    """

    def __init__(self, config: Optional[RunConfig] = None) -> None:
        self.config = config or RunConfig()
        self.settings = self.config.settings()

    # ------------------------------------------------------------------
    # Volumes
    # ------------------------------------------------------------------

    def volume(self, K: SymBody) -> Report:
        """Volume of K: exact when available, Monte Carlo with ``force_mc``."""
        cfg = self.config
        envelope = envelope_for(K, seed=cfg.seed % (2**32)) if cfg.force_mc else None
        estimate = volume(
            K,
            samples=cfg.samples,
            seed=cfg.seed,
            envelope=envelope,
            force_mc=cfg.force_mc,
            workers=cfg.workers,
        )
        row = _result_to_dict(estimate)
        return Report(
            kind="volume",
            payload={"body": K, "dim": K.dim, "volume": estimate},
            rows=[row],
            passed=estimate.usable,
        )

    # ------------------------------------------------------------------
    # Mahler product
    # ------------------------------------------------------------------

    def mahler(self, K: SymBody) -> Report:
        """
        s(K) with the Santaló check and the lower bounds that apply to K.

        The sandwich ratio is that of the John certificate (r = √n); when
        r < 2 the direct bound r^{-n} is checked instead of the sandwich bound.
        """
        cfg = self.config
        n = K.dim
        ratio = volume_product_ratio(K, samples=cfg.samples, seed=cfg.seed, workers=cfg.workers, force_mc=cfg.force_mc)
        cert = john_sandwich(K, seed=cfg.seed % (2**32))
        r = cert.ratio_r
        three_sigma = 3.0 * ratio.sigma

        records: List[StepRecord] = [santalo_check(K, ratio=ratio)]
        bounds: Dict[str, Any] = {}
        if r >= 2.0:
            bounds["sandwich"] = sandwich_bound(BoundQuery(r=r, n=n))
            records.append(
                inequality_record("sandwich_bound", ratio.s, bounds["sandwich"], tolerance=1e-12, ci=three_sigma)
            )
        else:
            bounds["direct"] = direct_bound(BoundQuery(r=max(r, 1.0), n=n))
            records.append(
                inequality_record(
                    "direct_bound",
                    ratio.s,
                    bounds["direct"],
                    tolerance=1e-12,
                    ci=three_sigma,
                    note=f"r = {r:.6g} < 2",
                )
            )
        if n >= 4:
            bounds["dimension"] = corollary_bound(n)
            records.append(
                inequality_record("dimension_bound", ratio.s, bounds["dimension"], tolerance=1e-12, ci=three_sigma)
            )
        if cfg.c_bm is not None:
            bounds["bm_line"] = bm_line(cfg.c_bm, n)
            records.append(
                note_record("bm_line", f"C = {cfg.c_bm:g}", lhs=ratio.s, rhs=bounds["bm_line"])
            )

        passed = all(rec.passed for rec in records) and ratio.volume_body.usable and ratio.volume_polar.usable
        LOG.info("mahler: n=%d s=%.9g r=%.6g passed=%s", n, ratio.s, r, passed)
        return Report(
            kind="mahler",
            payload={
                "body": K,
                "dim": n,
                "s": ratio.s,
                "ci95": ratio.ci,
                "volume_body": ratio.volume_body,
                "volume_polar": ratio.volume_polar,
                "sandwich": cert,
                "bounds": bounds,
                "checks": records,
            },
            rows=_record_rows(records),
            passed=passed,
        )

    # ------------------------------------------------------------------
    # Chain
    # ------------------------------------------------------------------

    def chain(self, K: SymBody, cert: Optional[SandwichCertificate] = None) -> Report:
        """
        Verify the induction for K.

        A user-supplied certificate is checked with :func:`verify_sandwich`
        first; a ``ContainmentError`` from that check propagates.
        """
        cfg = self.config
        seed32 = cfg.seed % (2**32)
        if cert is None:
            cert = default_certificate(K, seed=seed32)
        else:
            verify_sandwich(K, cert, tol=self.settings.containment_tol, seed=seed32)
        report = verify_chain(
            K,
            cert,
            samples=cfg.samples,
            seed=cfg.seed,
            workers=cfg.workers,
            settings=self.settings,
        )
        return Report(
            kind="chain",
            payload={
                "body": K,
                "certificate": cert,
                "levels": report.levels,
                "report": report,
            },
            rows=_record_rows(report.steps),
            passed=report.passed,
        )

    # ------------------------------------------------------------------
    # Bound table
    # ------------------------------------------------------------------

    def bound_table(self, n_min: int, n_max: int) -> Report:
        """(log₂ n)^{-n} for n_min ≤ n ≤ n_max, with C^{-n} when ``c_bm`` is set."""
        if n_max < n_min:
            raise ConfigurationError(f"empty dimension range [{n_min}, {n_max}]")
        rows: List[Dict[str, Any]] = []
        for n in range(n_min, n_max + 1):
            row: Dict[str, Any] = {
                "n": n,
                "corollary_bound": corollary_bound(n),
                "log_corollary_bound": log_corollary_bound(n),
            }
            if self.config.c_bm is not None:
                row["bm_line"] = bm_line(self.config.c_bm, n)
            rows.append(row)
        frame = pd.DataFrame(rows)
        monotone = bool(frame["corollary_bound"].is_monotonic_decreasing)
        return Report(kind="bound_table", payload={"rows": frame}, rows=rows, passed=monotone)

    # ------------------------------------------------------------------
    # MVEE
    # ------------------------------------------------------------------

    def mvee_points(self, points) -> Report:
        """Minimum-volume centered ellipsoid of ±points."""
        result = mvee_symmetric_detailed(points, eps=self.settings.khachiyan_eps)
        return self._ellipsoid_report(
            result.ellipsoid,
            source="points",
            extra={"converged": result.converged, "weights": result.weights},
            passed=result.converged,
        )

    def mvee_body(self, K: SymBody) -> Report:
        """Löwner ellipsoid of a body (exact for ellipsoids and vertex polytopes)."""
        E = loewner(K, seed=self.config.seed % (2**32))
        return self._ellipsoid_report(E, source="body", extra={"body": K}, passed=True)

    def _ellipsoid_report(self, E: Ellipsoid, source: str, extra: Dict[str, Any], passed: bool) -> Report:
        matrix = E.form.entries
        rows = [{"row": i, **{f"m{j}": float(matrix[i, j]) for j in range(E.dim)}} for i in range(E.dim)]
        payload = {
            "source": source,
            "dim": E.dim,
            "ellipsoid": {"matrix": matrix},
            "semi_axes": E.semi_axes(),
            "log_volume": E.log_volume,
            "metadata": dict(E.metadata),
            **extra,
        }
        return Report(kind="mvee", payload=payload, rows=rows, passed=passed)
