from __future__ import annotations

import math

import numpy as np
import pytest

from mahler.bodies import Cube, CrossPolytope, Ellipsoid, lp_ball, sphere_directions
from mahler.bounds import corollary_bound, volume_product_ratio
from mahler.chain import default_certificate, identify_polar, verify_chain, verify_chain_step
from mahler.config import get_settings
from mahler.ellipsoids import SandwichCertificate, john_sandwich
from mahler.errors import ChainError, ConfigurationError

SAMPLES = 20_000


def _loose_square_cert() -> SandwichCertificate:
    return SandwichCertificate.from_pair(Ellipsoid.ball(2, 0.1), Ellipsoid.ball(2, math.sqrt(2.0)))


def test_identify_polar_with_unit_ball_is_polar() -> None:
    K = Cube(2)
    Kp = identify_polar(K, Ellipsoid.ball(2))
    X = sphere_directions(2, 30, seed=0)
    assert np.allclose(Kp.gauges(X), K.polar().gauges(X))


def test_identify_polar_scales_with_f() -> None:
    """With F = {√50·|x|² ≤ 1}, Kp = {x : h_K(√50·x) ≤ 1}."""
    F = Ellipsoid(math.sqrt(50.0) * np.eye(2))
    Kp = identify_polar(Cube(2), F)
    X = sphere_directions(2, 30, seed=1)
    assert np.allclose(Kp.gauges(X), math.sqrt(50.0) * np.sum(np.abs(X), axis=1))


def test_default_certificate() -> None:
    ball = Ellipsoid.ball(3)
    assert default_certificate(ball).ratio_r == pytest.approx(1.0)
    assert default_certificate(Cube(3)).ratio_r == pytest.approx(math.sqrt(3.0), rel=1e-9)


def test_chain_step_loose_square() -> None:
    """One induction step from r = √200 hands over ratio √r."""
    outcome = verify_chain_step(Cube(2), _loose_square_cert(), samples=SAMPLES, seed=1)
    names = [rec.name for rec in outcome.records]
    for expected in (
        "f_geometric_mean_residual",
        "polar_contains_inner",
        "polar_within_outer",
        "slice_identity",
        "projection_identity",
        "product_volume_identity",
        "slice_projection_inequality",
        "pointwise_f_bound",
        "cap_within_scaled_f",
        "cap_contains_scaled_inner",
        "ratio_square_root",
    ):
        assert expected in names
    assert outcome.passed, [r for r in outcome.records if not r.passed]
    assert outcome.next_cert.ratio_r == pytest.approx(200.0**0.25, rel=1e-9)
    assert outcome.recurse


def test_chain_loose_square_runs_one_level() -> None:
    report = verify_chain(Cube(2), _loose_square_cert(), samples=SAMPLES, seed=2)
    assert report.levels == 1
    assert report.recursion_trace[1].r == pytest.approx(3.7606, abs=1e-3)
    assert report.final_bound == pytest.approx((2.0 * math.log2(math.sqrt(200.0))) ** -2, rel=1e-12)
    assert report.telescoped_bound >= report.final_bound
    assert report.passed, [r for r in report.steps if not r.passed]


def test_chain_ball_is_trivial() -> None:
    report = verify_chain(Ellipsoid.ball(2))
    assert report.levels == 0
    assert report.initial_ratio == pytest.approx(1.0)
    assert report.final_bound == pytest.approx(1.0)
    assert report.measured_product_ratio == pytest.approx(1.0, rel=1e-12)
    assert report.passed


def test_chain_cube3_routes_to_direct_bound() -> None:
    report = verify_chain(Cube(3))
    assert report.levels == 0
    assert report.final_bound == pytest.approx(3.0**-1.5, rel=1e-9)
    base = [r for r in report.steps if r.name == "base_case"][0]
    assert base.kind == "note"
    assert report.passed


@pytest.mark.parametrize("body", [Cube(4), CrossPolytope(4)])
def test_chain_dimension_four_base_case(body) -> None:
    report = verify_chain(body)
    assert report.levels == 0
    assert report.initial_ratio == pytest.approx(2.0, rel=1e-9)
    assert "measured_above_dimension_bound" in [r.name for r in report.steps]
    assert report.passed


def test_chain_dimension_cap() -> None:
    with pytest.raises(ConfigurationError):
        verify_chain(Cube(5))


def test_chain_level_guard() -> None:
    settings = get_settings().model_copy(update={"max_chain_levels": 0})
    with pytest.raises(ChainError):
        verify_chain(Cube(2), _loose_square_cert(), samples=SAMPLES, settings=settings)


@pytest.mark.parametrize(
    "body",
    [Cube(3), lp_ball(3.0, 3), Cube(4), CrossPolytope(4)],
    ids=["cube3", "l3-ball3", "cube4", "cross4"],
)
def test_chain_step_checks_pass_on_john_certificates(body) -> None:
    """Slice, projection, pointwise and inclusion checks hold below the recursion threshold too."""
    cert = john_sandwich(body)
    outcome = verify_chain_step(body, cert, samples=SAMPLES, seed=4)
    names = {rec.name for rec in outcome.records}
    assert {
        "slice_identity",
        "projection_identity",
        "slice_projection_inequality",
        "pointwise_f_bound",
        "cap_within_scaled_f",
        "cap_contains_scaled_inner",
    } <= names
    assert outcome.passed, [r for r in outcome.records if not r.passed]
    assert not outcome.recurse
    assert outcome.next_cert.ratio_r == pytest.approx(math.sqrt(cert.ratio_r), rel=1e-9)


def test_l3_ball4_lies_between_dimension_bound_and_one() -> None:
    body = lp_ball(3.0, 4)
    ratio = volume_product_ratio(body)
    three_sigma = 3.0 * ratio.sigma
    assert corollary_bound(4) - three_sigma <= ratio.s <= 1.0 + three_sigma
    report = verify_chain(body, samples=SAMPLES, seed=5)
    assert report.levels == 0
    assert report.final_bound - three_sigma <= report.measured_product_ratio <= 1.0 + three_sigma
    assert report.passed, [r for r in report.steps if not r.passed]
