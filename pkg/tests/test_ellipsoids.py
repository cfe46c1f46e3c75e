from __future__ import annotations

import math

import numpy as np
import pytest

from mahler.bodies import Cube, CrossPolytope, Ellipsoid, LpBall, SymPolytope, check_containment, sphere_directions
from mahler.ellipsoids import (
    SandwichCertificate,
    f_ellipsoid,
    john,
    john_sandwich,
    loewner,
    mvee_symmetric,
    mvee_symmetric_detailed,
    verify_sandwich,
)
from mahler.errors import ContainmentError, DegenerateBodyError, DimensionMismatchError
from mahler.ops import polar


def test_mvee_square_vertices() -> None:
    """±(1, 1), ±(1, −1): the circumscribed disk of radius √2."""
    E = mvee_symmetric([[1.0, 1.0], [1.0, -1.0]])
    assert np.allclose(E.form.entries, np.eye(2) / 2.0, atol=1e-6)


def test_mvee_axis_points() -> None:
    """±(2, 0), ±(0, 1) → diag(1/4, 1)."""
    E = mvee_symmetric([[2.0, 0.0], [0.0, 1.0]])
    assert np.allclose(E.form.entries, np.diag([0.25, 1.0]), atol=1e-6)


def test_mvee_contains_points_and_records_iterations() -> None:
    P = np.random.default_rng(0).standard_normal((40, 3))
    result = mvee_symmetric_detailed(P, eps=1e-8)
    assert result.converged
    assert np.all(result.ellipsoid.gauges(P) <= 1.0 + 1e-12)
    assert result.weights.sum() == pytest.approx(1.0)
    assert result.ellipsoid.metadata["method"] == "khachiyan"
    # optimality: the extreme points touch the boundary
    assert np.max(result.ellipsoid.gauges(P)) == pytest.approx(1.0, abs=1e-6)


def test_mvee_iteration_cap_still_encloses() -> None:
    P = np.random.default_rng(1).standard_normal((30, 3))
    result = mvee_symmetric_detailed(P, eps=1e-12, max_iter=2)
    assert not result.converged
    assert result.iterations == 2
    assert np.all(result.ellipsoid.gauges(P) <= 1.0 + 1e-12)


def test_mvee_rejects_rank_deficient_points() -> None:
    with pytest.raises(DegenerateBodyError):
        mvee_symmetric([[1.0, 1.0], [2.0, 2.0]])


def test_loewner_of_cube_is_ball_of_radius_sqrt_n() -> None:
    E = loewner(Cube(3))
    assert np.allclose(E.semi_axes(), math.sqrt(3.0), atol=1e-6)


def test_loewner_sampled_body_records_inflation() -> None:
    E = loewner(LpBall(4.0, 2))
    assert E.metadata["method"] == "boundary-sampled"
    assert E.metadata["inflation"] >= 1.0


def test_john_of_cube_and_cross() -> None:
    """John(cube) is the unit ball, John(cross) the ball of radius 1/√n."""
    assert np.allclose(john(Cube(3)).semi_axes(), 1.0, atol=1e-6)
    assert np.allclose(john(CrossPolytope(4)).semi_axes(), 0.5, atol=1e-6)


def test_john_sandwich_ratio() -> None:
    cert = john_sandwich(Cube(3))
    assert cert.ratio_r == pytest.approx(math.sqrt(3.0), rel=1e-9)
    assert cert.dim == 3
    ball = john_sandwich(Ellipsoid.ball(2))
    assert "note" in ball.metadata


def test_john_sandwich_sampled_body() -> None:
    K = LpBall(3.0, 3)
    cert = john_sandwich(K)
    assert cert.ratio_r == pytest.approx(math.sqrt(3.0), rel=1e-9)
    verify_sandwich(K, cert)


def test_verify_sandwich_reports_direction() -> None:
    cert = SandwichCertificate.from_pair(Ellipsoid.ball(2, 0.5), Ellipsoid.ball(2, 1.0))
    with pytest.raises(ContainmentError) as info:
        verify_sandwich(Cube(2), cert)
    assert info.value.direction is not None and len(info.value.direction) == 2
    bad_inner = SandwichCertificate.from_pair(Ellipsoid.ball(2, 1.2), Ellipsoid.ball(2, 2.0))
    with pytest.raises(ContainmentError, match="inner"):
        verify_sandwich(Cube(2), bad_inner)


def test_certificate_ratio() -> None:
    cert = SandwichCertificate.from_pair(Ellipsoid.ball(2, 0.1), Ellipsoid.ball(2, math.sqrt(2.0)))
    assert cert.ratio_r == pytest.approx(math.sqrt(200.0), rel=1e-12)
    with pytest.raises(DimensionMismatchError):
        SandwichCertificate.from_pair(Ellipsoid.ball(2), Ellipsoid.ball(3))


def test_f_ellipsoid_loose_square_pair() -> None:
    """
    E₁ = 0.1·disk, E₂ = √2·disk: F has form √50·I and is the volume
    geometric mean of the pair.
    """
    E1 = Ellipsoid.ball(2, 0.1)
    E2 = Ellipsoid.ball(2, math.sqrt(2.0))
    F = f_ellipsoid(E1, E2)
    assert np.allclose(F.form.entries, math.sqrt(50.0) * np.eye(2), rtol=1e-12)
    assert F.volume == pytest.approx(math.sqrt(E1.volume * E2.volume), rel=1e-12)
    assert F.metadata["residual"] <= 1e-10
    # F sits between the pair
    assert E2.contains_ellipsoid(F) and F.contains_ellipsoid(E1)


def test_f_ellipsoid_maps_outer_polar_to_inner() -> None:
    """Q M⁻¹ Q = N for a non-round nested pair."""
    E1 = Ellipsoid(np.array([[9.0, 1.0], [1.0, 4.0]]))
    E2 = Ellipsoid(np.array([[1.0, 0.2], [0.2, 0.5]]))
    F = f_ellipsoid(E1, E2)
    Q = F.form.entries
    assert np.allclose(Q @ np.linalg.solve(E2.form.entries, Q), E1.form.entries, atol=1e-9)


def test_f_ellipsoid_requires_nested_pair() -> None:
    with pytest.raises(ContainmentError):
        f_ellipsoid(Ellipsoid.ball(2, 2.0), Ellipsoid.ball(2, 1.0))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_loewner_of_cube_has_form_identity_over_n(n: int) -> None:
    E = loewner(Cube(n))
    assert np.allclose(E.form.entries, np.eye(n) / n, atol=1e-5)


_JOHN_BODIES = [
    pytest.param(polar(SymPolytope.random(n, 2 * n + 3, seed=n)), 1e-6, id=f"facets-{n}") for n in range(2, 7)
] + [pytest.param(LpBall(p, n), 1e-7, id=f"l{p:g}-{n}") for p in (1.5, 3.0) for n in range(2, 7)]


@pytest.mark.parametrize("K, tol", _JOHN_BODIES)
def test_john_ellipsoid_sandwiches_body_within_sqrt_n(K, tol: float) -> None:
    """J ⊆ K ⊆ √n·J."""
    n = K.dim
    J = john(K)
    D = sphere_directions(n, 1000, seed=2)
    assert check_containment(J, K, D, tol=tol).ok
    assert check_containment(K, J.scaled(math.sqrt(n)), D, tol=tol).ok


def test_mvee_volume_grows_as_points_are_added() -> None:
    P = np.random.default_rng(3).standard_normal((30, 3))
    log_volumes = [mvee_symmetric(P[:k], eps=1e-9).log_volume for k in range(3, 31)]
    for before, after in zip(log_volumes, log_volumes[1:]):
        assert after >= before - 1e-7


def _random_form(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return A @ A.T + 0.5 * np.eye(n)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_f_ellipsoid_volume_is_geometric_mean(n: int) -> None:
    """log Vol F − log Vol E₁ = ½ (log Vol E₂ − log Vol E₁) for nested pairs."""
    rng = np.random.default_rng(40 + n)
    M = _random_form(rng, n)
    N = 3.0 * M + _random_form(rng, n)
    E1, E2 = Ellipsoid(N), Ellipsoid(M)
    F = f_ellipsoid(E1, E2)
    lhs = F.log_volume - E1.log_volume
    rhs = 0.5 * (E2.log_volume - E1.log_volume)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
    assert F.metadata["residual"] <= 1e-8
