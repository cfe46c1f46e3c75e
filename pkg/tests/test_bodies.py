from __future__ import annotations

import math

import numpy as np
import pytest

from mahler.bodies import (
    Cube,
    CrossPolytope,
    Ellipsoid,
    LpBall,
    SymPolytope,
    check_containment,
    dual_gauge_numeric,
    gauge,
    lp_ball,
    sign_representatives,
    sphere_directions,
    support,
    support_estimate,
)
from mahler.errors import DegenerateBodyError, DimensionMismatchError, DomainError


def test_cube_and_cross_oracles() -> None:
    """Closed-form max-abs and ℓ1 oracles, exchanged by polarity."""
    x = np.array([0.5, -2.0, 1.0])
    assert gauge(Cube(3), x) == pytest.approx(2.0)
    assert support(Cube(3), x) == pytest.approx(3.5)
    assert gauge(CrossPolytope(3), x) == pytest.approx(3.5)
    assert support(CrossPolytope(3), x) == pytest.approx(2.0)
    assert isinstance(Cube(3).polar(), CrossPolytope)
    assert isinstance(CrossPolytope(3).polar(), Cube)


def test_lp_ball_dispatch() -> None:
    assert isinstance(lp_ball(1.0, 2), CrossPolytope)
    assert isinstance(lp_ball(math.inf, 2), Cube)
    assert isinstance(lp_ball(2.0, 2), Ellipsoid)
    ball = lp_ball(3.0, 2)
    assert isinstance(ball, LpBall)
    assert ball.q == pytest.approx(1.5)
    assert isinstance(ball.polar(), LpBall) and ball.polar().p == pytest.approx(1.5)
    with pytest.raises(DomainError):
        lp_ball(0.5, 2)


def test_ellipsoid_gauge_support_and_polar() -> None:
    """E = {x : xᵀ diag(4, 1) x ≤ 1} has semi-axes 1/2 and 1."""
    E = Ellipsoid(np.diag([4.0, 1.0]))
    assert gauge(E, [0.5, 0.0]) == pytest.approx(1.0)
    assert support(E, [1.0, 0.0]) == pytest.approx(0.5)
    assert sorted(E.semi_axes()) == pytest.approx([0.5, 1.0])
    assert E.volume == pytest.approx(math.pi / 2.0)
    Y = sphere_directions(2, 50, seed=1)
    assert np.allclose(E.polar().gauges(Y), E.supports(Y))
    assert np.allclose(E.polar().polar().form.entries, E.form.entries)


def test_gauge_homogeneity_and_triangle_inequality() -> None:
    """Sampled convexity checks for a non-polytope family member."""
    K = LpBall(3.0, 4)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((200, 4))
    Y = rng.standard_normal((200, 4))
    assert np.allclose(K.gauges(2.5 * X), 2.5 * K.gauges(X))
    assert np.allclose(K.gauges(-X), K.gauges(X))
    assert np.all(K.gauges(X + Y) <= K.gauges(X) + K.gauges(Y) + 1e-12)


def test_polytope_lp_oracles_match_closed_forms() -> None:
    """
    A vertex-only square and a facet-only square: the LP-backed oracle on
    each side agrees with the closed form on the other.
    """
    by_vertices = SymPolytope(vertices=[[1.0, 1.0], [1.0, -1.0]])
    by_facets = SymPolytope(facets=[[1.0, 0.0], [0.0, 1.0]])
    X = sphere_directions(2, 40, seed=2)
    assert np.allclose(by_vertices.gauges(X), Cube(2).gauges(X), atol=1e-9)
    assert np.allclose(by_facets.supports(X), Cube(2).supports(X), atol=1e-9)


def test_with_hull_facets_three_dimensions() -> None:
    """ConvexHull facets reproduce the LP gauge of the vertex form."""
    P = SymPolytope.random(3, 6, seed=4)
    full = P.with_hull_facets()
    assert full.facets is not None and full.vertices is not None
    X = sphere_directions(3, 30, seed=5)
    assert np.allclose(full.gauges(X), P.gauges(X), rtol=1e-8)
    # polarity swaps the representations
    assert np.allclose(full.polar().supports(X), full.gauges(X), rtol=1e-8)


def test_polytope_rejects_degenerate_and_inconsistent_input() -> None:
    with pytest.raises(DegenerateBodyError):
        SymPolytope(vertices=[[1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(DomainError):
        SymPolytope(vertices=[[1.0, 1.0], [1.0, -1.0]], facets=[[2.0, 0.0], [0.0, 1.0]])


def test_oracle_dimension_check() -> None:
    with pytest.raises(DimensionMismatchError):
        Cube(3).gauges(np.ones((2, 2)))


def test_sign_representatives() -> None:
    S = sign_representatives(3)
    assert S.shape == (4, 3)
    assert np.all(S[:, 0] == 1.0)
    assert len({tuple(row) for row in S}) == 4


def test_dual_gauge_numeric_recovers_closed_forms() -> None:
    """The numeric support from the gauge oracle alone matches h_K."""
    y = np.array([1.0, 2.0])
    assert dual_gauge_numeric(Cube(2), y) == pytest.approx(3.0, rel=1e-5)
    assert dual_gauge_numeric(CrossPolytope(2), y) == pytest.approx(2.0, rel=1e-5)
    K = LpBall(3.0, 3)
    z = np.array([0.3, -1.0, 0.7])
    est = support_estimate(K, z)
    assert est.value == pytest.approx(float(K.supports(z[None, :])[0]), rel=1e-5)
    assert est.converged
    assert support_estimate(K, np.zeros(3)).value == 0.0


def test_check_containment() -> None:
    """Ball ⊆ cube holds; the cube pokes out of the ball along a diagonal."""
    D = sphere_directions(2, 200, seed=0)
    ok = check_containment(Ellipsoid.ball(2), Cube(2), D)
    assert ok.ok and ok.worst_ratio <= 1.0 + 1e-12
    bad = check_containment(Cube(2), Ellipsoid.ball(2), D)
    assert not bad.ok
    assert 1.3 < bad.worst_ratio <= math.sqrt(2.0) + 1e-12
    assert abs(abs(bad.direction[0]) - abs(bad.direction[1])) < 0.2


@pytest.mark.parametrize("family", [Cube, CrossPolytope])
def test_families_reject_non_positive_dimension(family) -> None:
    with pytest.raises(DomainError):
        family(0)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_dual_gauge_numeric_matches_exact_support(n: int) -> None:
    rng = np.random.default_rng(60 + n)
    A = rng.standard_normal((n, n))
    bodies = [Ellipsoid(A @ A.T + np.eye(n)), LpBall(1.5, n), LpBall(3.0, n)]
    Y = rng.standard_normal((4, n))
    for K in bodies:
        for y in Y:
            exact = float(K.supports(y[None, :])[0])
            assert dual_gauge_numeric(K, y) == pytest.approx(exact, rel=1e-6)
