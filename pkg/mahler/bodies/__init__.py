"""
Symmetric convex bodies and their oracles.

    from mahler.bodies import Cube, Ellipsoid, gauge, support
"""

from __future__ import annotations

from .base import SymBody
from .families import (
    Cube,
    CrossPolytope,
    Ellipsoid,
    LpBall,
    SymPolytope,
    lp_ball,
    sign_representatives,
)
from .oracles import (
    ContainmentCheck,
    SupportEstimate,
    check_containment,
    dual_gauge_numeric,
    gauge,
    sphere_directions,
    support,
    support_estimate,
)
from .spec import build_body, load_body_spec, parse_body_spec

__all__ = [
    "ContainmentCheck",
    "Cube",
    "CrossPolytope",
    "Ellipsoid",
    "LpBall",
    "SupportEstimate",
    "SymBody",
    "SymPolytope",
    "build_body",
    "check_containment",
    "dual_gauge_numeric",
    "gauge",
    "load_body_spec",
    "lp_ball",
    "parse_body_spec",
    "sign_representatives",
    "sphere_directions",
    "support",
    "support_estimate",
]
