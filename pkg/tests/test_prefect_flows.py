from __future__ import annotations

import logging
import math

import pytest

from mahler.bodies import Cube
from orchestration import prefect_flows
from orchestration.prefect_flows import SuiteCase, reference_suite


def test_reference_suite_cases() -> None:
    """The acceptance suite covers the reference bodies, all in dimension <= 4."""
    cases = {case.name: case for case in reference_suite()}
    assert set(cases) == {"ball", "loose-square", "cube3", "cube4", "cross4", "l3-ball3"}
    assert all(case.body.dim <= 4 for case in cases.values())


def test_loose_square_certificate_ratio() -> None:
    square = next(case for case in reference_suite() if case.name == "loose-square")
    assert square.cert is not None
    assert square.cert.ratio_r == pytest.approx(math.sqrt(200.0), rel=1e-12)


def test_acceptance_flow_logs_one_line_per_case(monkeypatch: pytest.MonkeyPatch, caplog: pytest.LogCaptureFixture) -> None:
    """Without Prefect the flow is a plain function over the suite."""
    if hasattr(prefect_flows.acceptance_suite_flow, "fn"):
        pytest.skip("Prefect is installed; the flow would start the Prefect engine")
    monkeypatch.setattr(prefect_flows, "reference_suite", lambda: [SuiteCase("cube3", Cube(3))])
    with caplog.at_level(logging.INFO, logger="orchestration.prefect_flows"):
        results = prefect_flows.acceptance_suite_flow(samples=1000, seed=0)
    assert results == {"cube3": True}
    assert "cube3: n=3" in caplog.text
    assert "PASS" in caplog.text
