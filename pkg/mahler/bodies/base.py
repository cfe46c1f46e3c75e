"""
The symmetric convex body abstraction.

A :class:`SymBody` is an origin-symmetric convex body with nonempty interior,
seen only through two oracles:

* the gauge ``‖x‖_K`` (least t > 0 with x/t ∈ K), and
* the support function ``h_K(y) = sup_{x ∈ K} ⟨x, y⟩``, which is the gauge of
  the polar body.

Oracles are batched: they take an ``(m, n)`` array and return ``m`` values, so
Monte Carlo sampling never loops in Python over samples for closed-form bodies.
Bodies are immutable once constructed.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np

from mahler.errors import DimensionMismatchError, DomainError


class SymBody(ABC):
    """
    Abstract base class for symmetric convex bodies.

    Subclasses implement :meth:`gauges`, :meth:`supports`, :meth:`polar` and
    :meth:`describe`. The exactness flags report whether an oracle is a closed
    form / LP (exact) or a numeric optimization (flagged).
    """

    def __init__(self, dim: int) -> None:
        if int(dim) != dim or dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {dim!r}")
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    # ------------------------------------------------------------------
    # Oracles
    # ------------------------------------------------------------------

    @abstractmethod
    def gauges(self, X: np.ndarray) -> np.ndarray:
        """Gauge ‖x‖_K for every row of ``X``."""

    @abstractmethod
    def supports(self, Y: np.ndarray) -> np.ndarray:
        """Support h_K(y) for every row of ``Y``."""

    @abstractmethod
    def polar(self) -> "SymBody":
        """The polar body K° (gauge and support exchanged)."""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Provenance as a body-spec document (JSON-friendly)."""

    @property
    def gauge_exact(self) -> bool:
        return True

    @property
    def support_exact(self) -> bool:
        return True

    def gauge(self, x) -> float:
        return float(self.gauges(self._as_points(x))[0])

    def support(self, y) -> float:
        return float(self.supports(self._as_points(y))[0])

    def contains(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Boolean membership for every row of ``X``."""
        return self.gauges(self._as_points(X)) <= 1.0 + tol

    @property
    def exact_volume(self) -> Optional[float]:
        """Closed-form volume, or None outside the closed-form families."""
        from mahler.volume import volume_exact

        estimate = volume_exact(self)
        return None if estimate is None else estimate.value

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _as_points(self, X) -> np.ndarray:
        """Validate and promote ``X`` to an ``(m, dim)`` float array."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.ndim != 2 or X.shape[1] != self._dim:
            raise DimensionMismatchError(
                f"{type(self).__name__} has dimension {self._dim}, got points of shape {X.shape}"
            )
        return X

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self._dim})"
