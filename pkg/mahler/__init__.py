"""
Top-level package for mahler-core.

Origin-symmetric convex bodies, their volumes and polars, Löwner and John
ellipsoids, and certified checks of lower bounds on the Mahler volume
product. The names below are re-exported when their submodules import;
a broken optional piece never makes ``import mahler`` fail.
"""

from __future__ import annotations

import importlib
import logging
from importlib.metadata import PackageNotFoundError, version

__all__: list[str] = ["__version__"]

try:
    __version__ = version("mahler-core")
except PackageNotFoundError:  # pragma: no cover - source checkout
    __version__ = "0.1.0"


def _export_from(module_name: str, names: list[str]) -> None:
    """Re-export ``names`` from ``mahler.<module_name>``; missing ones are logged and skipped."""
    try:
        module = importlib.import_module(f".{module_name}", __name__)
    except Exception as exc:  # pragma: no cover
        logging.getLogger(__name__).debug("mahler.%s not exported: %s", module_name, exc)
        return
    found = [name for name in names if hasattr(module, name)]
    globals().update({name: getattr(module, name) for name in found})
    __all__.extend(found)


_export_from("errors", ["MahlerError", "DomainError", "PreconditionError", "ContainmentError"])
_export_from(
    "bodies",
    ["SymBody", "Cube", "CrossPolytope", "Ellipsoid", "SymPolytope", "lp_ball", "gauge", "support", "parse_body_spec"],
)
_export_from("ops", ["polar", "cap_p", "sum_p", "prod_p", "linear_image", "scale", "shear_product"])
_export_from("volume", ["VolumeEstimate", "volume", "volume_exact", "volume_mc", "lp_ball_volume"])
_export_from("ellipsoids", ["mvee_symmetric", "loewner", "john", "john_sandwich", "f_ellipsoid"])
_export_from(
    "bounds",
    ["sandwich_bound", "corollary_bound", "direct_bound", "volume_product_ratio", "santalo_check"],
)
_export_from("chain", ["identify_polar", "verify_chain_step", "verify_chain"])
