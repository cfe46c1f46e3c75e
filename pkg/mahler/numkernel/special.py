"""
Special functions used by the volume formulas.

All binomials and ball volumes are evaluated in log space so that the bound
tables stay finite far beyond the dimensions where anything is sampled.
"""

from __future__ import annotations

import math

from scipy import special

from mahler.errors import DomainError


def log_gamma(x: float) -> float:
    """
    Return ln Γ(x) for x > 0.

    Parameters
    ----------
    x:
        Positive real argument.

    Raises
    ------
    DomainError
        If ``x <= 0``.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return float(special.gammaln(x))


def log_frac_binom(x: float, y: float) -> float:
    """Return ln of the fractional binomial coefficient binom(x, y)."""
    x = float(x)
    y = float(y)
    if y < 0.0 or y > x:
        raise DomainError(f"frac_binom requires 0 <= y <= x, got x={x!r}, y={y!r}")
    return log_gamma(x + 1.0) - log_gamma(y + 1.0) - log_gamma(x - y + 1.0)


def frac_binom(x: float, y: float) -> float:
    """
    Fractional binomial coefficient Γ(x+1) / (Γ(y+1) Γ(x−y+1)).

    Evaluated in log space; ``binom(1, 1/2) = 4/π`` and the integer cases
    reduce to the usual binomial.
    """
    return math.exp(log_frac_binom(x, y))


def log_ball_volume(n: int) -> float:
    """Return ln b_n, the log-volume of the Euclidean unit ball in R^n."""
    if int(n) != n or n < 1:
        raise DomainError(f"ball_volume requires an integer n >= 1, got {n!r}")
    n = int(n)
    return 0.5 * n * math.log(math.pi) - log_gamma(0.5 * n + 1.0)


def ball_volume(n: int) -> float:
    """Volume b_n = π^{n/2} / Γ(n/2 + 1) of the Euclidean unit ball."""
    return math.exp(log_ball_volume(n))
