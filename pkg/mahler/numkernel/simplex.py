"""
Small dense two-phase simplex solver.

Solves ``maximize cᵀx subject to A x <= b`` with free variables ``x``. The
gauge of a vertex-represented polytope and the support of a facet-represented
polytope are both LPs of this shape with at most dim+1 variables.

Pivoting uses Dantzig's rule and switches to Bland's rule once
5·(constraints) degenerate pivots have been made, which rules out cycling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from mahler.errors import ConfigurationError, DomainError, PreconditionError

LOG = logging.getLogger(__name__)

MAX_VARIABLES = 64
MAX_CONSTRAINTS = 256

_TOL = 1e-9


@dataclass(frozen=True)
class LPProblem:
    """
    Linear program ``maximize objective·x s.t. constraints_matrix @ x <= bounds``.

    Variables are free (unbounded in sign).
    """

    objective: np.ndarray
    constraints_matrix: np.ndarray
    bounds: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).ravel()
        A = np.atleast_2d(np.asarray(self.constraints_matrix, dtype=float))
        b = np.asarray(self.bounds, dtype=float).ravel()
        if A.shape[1] != c.shape[0] or A.shape[0] != b.shape[0]:
            raise DomainError(
                f"LP shapes disagree: objective {c.shape}, matrix {A.shape}, bounds {b.shape}"
            )
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraints_matrix", A)
        object.__setattr__(self, "bounds", b)

    @classmethod
    def from_constraints(
        cls,
        objective: Sequence[float],
        constraints: Sequence[Tuple[Sequence[float], float]],
    ) -> "LPProblem":
        """Build from a list of ``(a, b)`` pairs meaning ``aᵀx <= b``."""
        A = np.array([a for a, _ in constraints], dtype=float)
        b = np.array([bound for _, bound in constraints], dtype=float)
        return cls(np.asarray(objective, dtype=float), A, b)

    @property
    def num_variables(self) -> int:
        return int(self.objective.shape[0])

    @property
    def num_constraints(self) -> int:
        return int(self.bounds.shape[0])


@dataclass
class LPResult:
    """
    Outcome of :func:`lp_solve`.

    status:
        "optimal", "unbounded" or "infeasible".
    value, x:
        Optimal value and optimizer (None unless optimal).
    """

    status: str
    value: Optional[float] = None
    x: Optional[np.ndarray] = None
    pivots: int = 0
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense simplex tableau ``[B⁻¹A | B⁻¹b]`` with an explicit basis."""

    def __init__(self, T: np.ndarray, basis: List[int], max_degenerate: int) -> None:
        self.T = T
        self.basis = basis
        self.pivots = 0
        self.degenerate = 0
        self.max_degenerate = max_degenerate
        self.bland = False

    @property
    def rows(self) -> int:
        return self.T.shape[0]

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        for i in range(T.shape[0]):
            if i != row and T[i, col] != 0.0:
                T[i] -= T[i, col] * T[row]
        self.basis[row] = col
        self.pivots += 1

    def optimize(self, cost: np.ndarray, allowed: np.ndarray, max_pivots: int) -> str:
        """Maximize ``cost·z`` over the columns flagged in ``allowed``."""
        T = self.T
        while True:
            if self.pivots >= max_pivots:
                raise PreconditionError(
                    f"simplex exceeded {max_pivots} pivots; raise max_pivots or rescale the constraints"
                )
            reduced = cost - cost[self.basis] @ T[:, :-1]
            reduced[~allowed] = 0.0
            reduced[self.basis] = 0.0
            candidates = np.flatnonzero(reduced > _TOL)
            if candidates.size == 0:
                return "optimal"
            if self.bland:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmax(reduced[candidates])])

            column = T[:, col]
            positive = np.flatnonzero(column > _TOL)
            if positive.size == 0:
                return "unbounded"
            ratios = T[positive, -1] / column[positive]
            best = float(np.min(ratios))
            ties = positive[ratios <= best + _TOL]
            if self.bland:
                row = int(min(ties, key=lambda i: self.basis[i]))
            else:
                row = int(ties[np.argmax(column[ties])])

            if best <= _TOL:
                self.degenerate += 1
                if not self.bland and self.degenerate >= self.max_degenerate:
                    LOG.debug("switching to Bland's rule after %d degenerate pivots", self.degenerate)
                    self.bland = True
            self.pivot(row, col)


def lp_solve(problem: LPProblem, max_pivots: int = 10_000) -> LPResult:
    """
    Solve ``maximize cᵀx s.t. A x <= b`` with free ``x`` by two-phase simplex.

    Parameters
    ----------
    problem:
        The LP; at most 64 variables and 256 constraints.
    max_pivots:
        Safety cap across both phases.

    Returns
    -------
    LPResult
        ``status`` is "optimal", "unbounded" or "infeasible".

    Raises
    ------
    ConfigurationError
        If the problem exceeds the size caps.
    PreconditionError
        If the pivot count reaches ``max_pivots``.
    """
    d = problem.num_variables
    m = problem.num_constraints
    if d > MAX_VARIABLES or m > MAX_CONSTRAINTS:
        raise ConfigurationError(
            f"LP of {d} variables / {m} constraints exceeds caps "
            f"({MAX_VARIABLES} / {MAX_CONSTRAINTS})"
        )
    A = problem.constraints_matrix
    b = problem.bounds
    c = problem.objective

    if m == 0:
        if np.any(np.abs(c) > _TOL):
            return LPResult(status="unbounded")
        return LPResult(status="optimal", value=0.0, x=np.zeros(d))

    # Columns: x+ (d), x- (d), slacks (m), artificials (one per negative bound).
    negative = np.flatnonzero(b < 0.0)
    n_art = int(negative.size)
    n_cols = 2 * d + m + n_art
    T = np.zeros((m, n_cols + 1))
    T[:, :d] = A
    T[:, d : 2 * d] = -A
    T[:, 2 * d : 2 * d + m] = np.eye(m)
    T[:, -1] = b
    T[negative] *= -1.0

    basis = [2 * d + i for i in range(m)]
    for k, i in enumerate(negative):
        col = 2 * d + m + k
        T[i, col] = 1.0
        basis[i] = col

    tab = _Tableau(T, basis, max_degenerate=5 * m)
    art_cols = np.arange(2 * d + m, n_cols)
    all_cols = np.ones(n_cols, dtype=bool)

    if n_art:
        art_set = {int(j) for j in art_cols}
        phase1 = np.zeros(n_cols)
        phase1[art_cols] = -1.0
        tab.optimize(phase1, all_cols, max_pivots)
        basic_art = [i for i, j in enumerate(tab.basis) if j in art_set]
        infeasibility = float(np.sum(tab.T[basic_art, -1]))
        if infeasibility > 1e-9 * max(1.0, float(np.max(np.abs(b)))):
            return LPResult(status="infeasible", pivots=tab.pivots)
        _drive_out_artificials(tab, art_set)

    allowed = np.ones(n_cols, dtype=bool)
    allowed[art_cols] = False
    cost = np.zeros(n_cols)
    cost[:d] = c
    cost[d : 2 * d] = -c
    status = tab.optimize(cost, allowed, max_pivots)
    if status == "unbounded":
        return LPResult(status="unbounded", pivots=tab.pivots)

    z = np.zeros(n_cols)
    z[tab.basis] = tab.T[:, -1]
    x = z[:d] - z[d : 2 * d]
    return LPResult(
        status="optimal",
        value=float(c @ x),
        x=x,
        pivots=tab.pivots,
        metadata={"rule": "bland" if tab.bland else "dantzig"},
    )


def _drive_out_artificials(tab: _Tableau, artificial: set) -> None:
    """Pivot zero-level artificials out of the basis; drop redundant rows."""
    keep: List[int] = []
    for row in range(tab.rows):
        if tab.basis[row] not in artificial:
            keep.append(row)
            continue
        entries = tab.T[row, :-1].copy()
        entries[list(artificial)] = 0.0
        cols = np.flatnonzero(np.abs(entries) > _TOL)
        if cols.size:
            tab.pivot(row, int(cols[0]))
            keep.append(row)
    if len(keep) < tab.rows:
        tab.T = tab.T[keep]
        tab.basis = [tab.basis[i] for i in keep]
