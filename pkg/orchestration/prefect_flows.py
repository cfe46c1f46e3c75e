# orchestration/prefect_flows.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

try:  # Prefect is an optional dependency
    from prefect import flow, task  # type: ignore[import]
except Exception:  # pragma: no cover - graceful degradation if Prefect is missing
    def _identity_decorator(fn=None, *args, **kwargs):
        """Fallback no-op decorator used when Prefect is not installed.

        Works both as ``@flow`` and as ``@flow(name=...)``; the wrapped
        function is returned unchanged.
        """
        if fn is not None and callable(fn):
            return fn

        def wrapper(f):
            return f

        return wrapper

    flow = _identity_decorator  # type: ignore[assignment]
    task = _identity_decorator  # type: ignore[assignment]

from mahler.bodies import Cube, CrossPolytope, Ellipsoid, SymBody, lp_ball
from mahler.chain import ChainReport, verify_chain
from mahler.ellipsoids import SandwichCertificate

LOG = logging.getLogger(__name__)


@dataclass
class SuiteCase:
    """One body of the acceptance suite, with an optional fixed certificate."""

    name: str
    body: SymBody
    cert: Optional[SandwichCertificate] = None


def reference_suite() -> List[SuiteCase]:
    """Ball, the square with a loose inner disk, cube₃, cube₄, cross₄ and the ℓ₃ ball in R³."""
    square_cert = SandwichCertificate.from_pair(
        Ellipsoid.ball(2, 0.1), Ellipsoid.ball(2, math.sqrt(2.0)), source="loose-square"
    )
    return [
        SuiteCase("ball", Ellipsoid.ball(3)),
        SuiteCase("loose-square", Cube(2), square_cert),
        SuiteCase("cube3", Cube(3)),
        SuiteCase("cube4", Cube(4)),
        SuiteCase("cross4", CrossPolytope(4)),
        SuiteCase("l3-ball3", lp_ball(3.0, 3)),
    ]


@task
def _verify_case(case: SuiteCase, samples: int, seed: int) -> ChainReport:
    return verify_chain(case.body, case.cert, samples=samples, seed=seed)


@task
def _log_summary(name: str, report: ChainReport) -> None:
    """One line per body: levels, bounds, measured ratio, verdict."""
    failed = [rec.name for rec in report.steps if not rec.passed]
    LOG.info(
        "%s: n=%d r0=%.6g levels=%d bound=%.6g s=%.6g±%.2g %s",
        name,
        report.dim,
        report.initial_ratio,
        report.levels,
        report.final_bound,
        report.measured_product_ratio,
        report.product_ratio_ci,
        "PASS" if report.passed else f"FAIL {failed}",
    )


@flow(name="Mahler Acceptance Suite")
def acceptance_suite_flow(samples: int = 20_000, seed: int = 0) -> Dict[str, bool]:
    """
    Run the chain verifier over the reference suite.

    Returns a mapping from case name to pass/fail.
    """
    results: Dict[str, bool] = {}
    for case in reference_suite():
        report = _verify_case(case, samples, seed)
        _log_summary(case.name, report)
        results[case.name] = report.passed
    return results


if __name__ == "__main__":  # pragma: no cover
    acceptance_suite_flow()
