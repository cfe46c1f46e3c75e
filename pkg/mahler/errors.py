"""
Exception hierarchy for mahler-core.

Every error raised on purpose by the library derives from :class:`MahlerError`
and from the closest builtin (``ValueError`` for bad arguments,
``RuntimeError`` for failures discovered while running), so callers that only
know the builtins keep working.
"""

from __future__ import annotations

from typing import Optional, Sequence


class MahlerError(Exception):
    """Base class for all mahler-core errors."""


class DomainError(MahlerError, ValueError):
    """An argument lies outside the domain of an operation."""


class DimensionMismatchError(DomainError):
    """Two objects that must share a dimension do not."""


class NotPositiveDefiniteError(DomainError):
    """A symmetric matrix failed its Cholesky factorization."""


class DegenerateBodyError(DomainError):
    """A body has empty interior (rank-deficient form, vertices or facets)."""


class ConfigurationError(MahlerError, ValueError):
    """A size cap or run option is out of range."""


class BodySpecError(MahlerError, ValueError):
    """A body specification document could not be parsed or built."""


class PreconditionError(MahlerError, RuntimeError):
    """A runtime precondition failed; the message carries a remediation hint."""


class ContainmentError(PreconditionError):
    """A sampled containment check failed at a specific direction."""

    def __init__(self, message: str, direction: Optional[Sequence[float]] = None) -> None:
        super().__init__(message)
        self.direction = None if direction is None else [float(v) for v in direction]


class ChainError(MahlerError, RuntimeError):
    """The chain verifier exceeded its recursion guard."""
