"""
JSON body specifications.

A body spec is a JSON document, either a family leaf::

    {"type": "cube", "dim": 3}
    {"type": "cross", "dim": 3}
    {"type": "lp_ball", "p": 3, "dim": 3}
    {"type": "ellipsoid", "matrix": [[4, 0], [0, 1]]}
    {"type": "polytope", "vertices": [[1, 0], [0, 1]]}     # or "facets"

or an operation node::

    {"op": "polar", "args": [<spec>]}
    {"op": "cap_p" | "sum_p" | "prod_p", "p": 2, "args": [<spec>, <spec>]}
    {"op": "linmap", "matrix": [[...]], "args": [<spec>]}
    {"op": "scale", "factor": 0.5, "args": [<spec>]}

``p`` may be a number ≥ 1 or the string "inf". Polytope lists give one
representative per ± pair. Errors are reported as :class:`BodySpecError`
with a JSON path (``$.args[1].dim``) or a line/column for malformed JSON.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator, model_validator

from mahler.bodies.base import SymBody
from mahler.errors import BodySpecError, MahlerError

PValue = Union[float, Literal["inf", "infinity"]]


def _p_float(value: PValue) -> float:
    if isinstance(value, str):
        return math.inf
    return float(value)


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CubeSpec(_Spec):
    type: Literal["cube"]
    dim: PositiveInt


class CrossSpec(_Spec):
    type: Literal["cross"]
    dim: PositiveInt


class LpBallSpec(_Spec):
    type: Literal["lp_ball"]
    p: PValue
    dim: PositiveInt

    @field_validator("p")
    @classmethod
    def _p_at_least_one(cls, v: PValue) -> PValue:
        if _p_float(v) < 1.0:
            raise ValueError("p must be >= 1")
        return v


class EllipsoidSpec(_Spec):
    type: Literal["ellipsoid"]
    matrix: List[List[float]]


class PolytopeSpec(_Spec):
    type: Literal["polytope"]
    vertices: Optional[List[List[float]]] = None
    facets: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _one_representation(self) -> "PolytopeSpec":
        if self.vertices is None and self.facets is None:
            raise ValueError("polytope needs 'vertices' or 'facets'")
        return self


_ARITY = {"polar": 1, "linmap": 1, "scale": 1, "cap_p": 2, "sum_p": 2, "prod_p": 2}


class OpSpec(_Spec):
    op: Literal["polar", "cap_p", "sum_p", "prod_p", "linmap", "scale"]
    args: List[Any] = Field(min_length=1)
    p: Optional[PValue] = None
    matrix: Optional[List[List[float]]] = None
    factor: Optional[float] = None

    @model_validator(mode="after")
    def _operands(self) -> "OpSpec":
        arity = _ARITY[self.op]
        if len(self.args) != arity:
            raise ValueError(f"'{self.op}' takes {arity} argument(s), got {len(self.args)}")
        if self.op in ("cap_p", "sum_p", "prod_p"):
            if self.p is None:
                raise ValueError(f"'{self.op}' needs 'p'")
            if _p_float(self.p) < 1.0:
                raise ValueError("p must be >= 1")
        if self.op == "linmap" and self.matrix is None:
            raise ValueError("'linmap' needs 'matrix'")
        if self.op == "scale" and (self.factor is None or not self.factor > 0.0):
            raise ValueError("'scale' needs a positive 'factor'")
        return self


_LEAVES = {
    "cube": CubeSpec,
    "cross": CrossSpec,
    "lp_ball": LpBallSpec,
    "ellipsoid": EllipsoidSpec,
    "polytope": PolytopeSpec,
}


def _location(path: str, loc) -> str:
    out = path
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _validate(model: type[_Spec], doc: dict, path: str) -> Any:
    try:
        return model.model_validate(doc)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise BodySpecError(f"{_location(path, err['loc'])}: {err['msg']}") from None


def build_body(doc: Any, path: str = "$") -> SymBody:
    """
    Build a body from a parsed spec document.

    Raises
    ------
    BodySpecError
        On any structural problem, with the JSON path of the offending field.
        Domain errors raised by constructors (singular matrices, degenerate
        polytopes) are re-raised as BodySpecError at the node's path.
    """
    from mahler import ops
    from mahler.bodies.families import Cube, CrossPolytope, Ellipsoid, SymPolytope, lp_ball

    if not isinstance(doc, dict):
        raise BodySpecError(f"{path}: expected an object, got {type(doc).__name__}")
    if "op" in doc:
        spec = _validate(OpSpec, doc, path)
        args = [build_body(arg, f"{path}.args[{i}]") for i, arg in enumerate(spec.args)]
        try:
            if spec.op == "polar":
                return ops.polar(args[0])
            if spec.op == "cap_p":
                return ops.cap_p(_p_float(spec.p), *args)
            if spec.op == "sum_p":
                return ops.sum_p(_p_float(spec.p), *args)
            if spec.op == "prod_p":
                return ops.prod_p(_p_float(spec.p), *args)
            if spec.op == "linmap":
                return ops.linear_image(spec.matrix, args[0])
            return ops.scale(args[0], float(spec.factor))
        except MahlerError as exc:
            raise BodySpecError(f"{path}: {exc}") from exc

    kind = doc.get("type")
    if kind not in _LEAVES:
        raise BodySpecError(
            f"{path}.type: expected one of {sorted(_LEAVES)} (or an 'op' node), got {kind!r}"
        )
    spec = _validate(_LEAVES[kind], doc, path)
    try:
        if isinstance(spec, CubeSpec):
            return Cube(spec.dim)
        if isinstance(spec, CrossSpec):
            return CrossPolytope(spec.dim)
        if isinstance(spec, LpBallSpec):
            return lp_ball(_p_float(spec.p), spec.dim)
        if isinstance(spec, EllipsoidSpec):
            return Ellipsoid(spec.matrix)
        return SymPolytope(vertices=spec.vertices, facets=spec.facets)
    except MahlerError as exc:
        raise BodySpecError(f"{path}: {exc}") from exc


def parse_body_spec(text: str, source: str = "<spec>") -> SymBody:
    """Parse JSON text and build the body."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BodySpecError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return build_body(doc)


def load_body_spec(path: Union[str, Path]) -> SymBody:
    """Read and build a body spec file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BodySpecError(f"{path}: cannot read body spec ({exc.strerror})") from None
    return parse_body_spec(text, source=str(path))
