from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from mahler.bodies import Cube, CrossPolytope, Ellipsoid, SymPolytope, build_body, load_body_spec, parse_body_spec
from mahler.errors import BodySpecError
from mahler.ops import CapBody, LinearImage, ProductBody, SumBody


def test_parse_family_leaves() -> None:
    assert isinstance(parse_body_spec('{"type": "cube", "dim": 3}'), Cube)
    assert isinstance(parse_body_spec('{"type": "cross", "dim": 2}'), CrossPolytope)
    assert isinstance(parse_body_spec('{"type": "lp_ball", "p": "inf", "dim": 2}'), Cube)
    E = parse_body_spec('{"type": "ellipsoid", "matrix": [[4, 0], [0, 1]]}')
    assert isinstance(E, Ellipsoid)
    P = parse_body_spec('{"type": "polytope", "facets": [[1, 0], [0, 1]]}')
    assert isinstance(P, SymPolytope) and P.vertices is None


def test_parse_operation_tree() -> None:
    """Nested operation nodes build the matching composite bodies."""
    doc = {
        "op": "sum_p",
        "p": 2,
        "args": [
            {"op": "cap_p", "p": "inf", "args": [{"type": "cube", "dim": 2}, {"type": "cross", "dim": 2}]},
            {"op": "linmap", "matrix": [[2, 0], [0, 1]], "args": [{"type": "cube", "dim": 2}]},
        ],
    }
    K = build_body(doc)
    assert isinstance(K, SumBody)
    assert isinstance(K.A, CapBody) and math.isinf(K.A.p.p)
    assert isinstance(K.B, LinearImage)
    prod = build_body({"op": "prod_p", "p": 1, "args": [{"type": "cube", "dim": 1}, {"type": "cube", "dim": 2}]})
    assert isinstance(prod, ProductBody) and prod.dim == 3


def test_scale_and_polar_ops() -> None:
    K = build_body({"op": "scale", "factor": 0.5, "args": [{"op": "polar", "args": [{"type": "cube", "dim": 2}]}]})
    assert K.gauge(np.array([0.25, 0.25])) == pytest.approx(1.0)


def test_describe_round_trips_through_build() -> None:
    """describe() is itself a valid spec for the same body."""
    K = build_body({"op": "cap_p", "p": 2, "args": [{"type": "cube", "dim": 2}, {"type": "cross", "dim": 2}]})
    again = build_body(json.loads(json.dumps(K.describe())))
    X = np.random.default_rng(0).standard_normal((20, 2))
    assert np.allclose(again.gauges(X), K.gauges(X))


def test_error_reports_json_path() -> None:
    doc = {"op": "cap_p", "p": 2, "args": [{"type": "cube", "dim": 2}, {"type": "cross", "dim": 0}]}
    with pytest.raises(BodySpecError, match=r"^\$\.args\[1\]\.dim"):
        build_body(doc)


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ({"type": "sphere", "dim": 2}, "type"),
        ({"op": "polar", "args": [{"type": "cube", "dim": 2}, {"type": "cube", "dim": 2}]}, "argument"),
        ({"op": "sum_p", "args": [{"type": "cube", "dim": 2}, {"type": "cube", "dim": 2}]}, "needs 'p'"),
        ({"type": "lp_ball", "p": 0.5, "dim": 2}, "p must be >= 1"),
        ({"type": "cube", "dim": 2, "colour": "red"}, "colour"),
        ({"type": "polytope"}, "vertices"),
        ({"type": "ellipsoid", "matrix": [[1, 0], [0, -1]]}, "positive-definite"),
    ],
)
def test_invalid_specs(doc: dict, fragment: str) -> None:
    with pytest.raises(BodySpecError, match=fragment):
        build_body(doc)


def test_malformed_json_reports_line_and_column() -> None:
    with pytest.raises(BodySpecError, match=r"^cube\.json:2:"):
        parse_body_spec('{"type": "cube",\n "dim": }', source="cube.json")


def test_load_body_spec(tmp_path: Path) -> None:
    path = tmp_path / "cube.json"
    path.write_text('{"type": "cube", "dim": 4}', encoding="utf-8")
    assert load_body_spec(path).dim == 4
    with pytest.raises(BodySpecError, match="cannot read"):
        load_body_spec(tmp_path / "missing.json")
