"""
Dense numerics for mahler-core: special functions, symmetric linear algebra
and a small simplex solver.

    from mahler.numkernel import frac_binom, matrix_geometric_mean, lp_solve
"""

from __future__ import annotations

from .linalg import (
    SymFactorization,
    SymMatrix,
    as_sym_matrix,
    geometric_mean_residual,
    is_positive_definite,
    jacobi_eigh,
    matrix_geometric_mean,
    sym_factor,
    sym_power,
)
from .simplex import LPProblem, LPResult, lp_solve
from .special import (
    ball_volume,
    frac_binom,
    log_ball_volume,
    log_frac_binom,
    log_gamma,
)

__all__ = [
    "LPProblem",
    "LPResult",
    "SymFactorization",
    "SymMatrix",
    "as_sym_matrix",
    "ball_volume",
    "frac_binom",
    "geometric_mean_residual",
    "is_positive_definite",
    "jacobi_eigh",
    "log_ball_volume",
    "log_frac_binom",
    "log_gamma",
    "lp_solve",
    "matrix_geometric_mean",
    "sym_factor",
    "sym_power",
]
