"""Small dense linear programs: two-phase tableau simplex.

Pricing is Dantzig's most negative reduced cost; after a run of degenerate pivots
the tableau switches to Bland's rule for good, which rules out cycling.

Problems are stated as

    minimize c @ x  subject to  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  lb <= x <= ub

with infinite bounds allowed. Bounds are folded into the tableau by shifting,
reflecting or splitting variables so that the working variables are nonnegative.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray

from censored_regret.config import settings
from censored_regret.errors import InvalidParameterError, SolverError

logger = logging.getLogger(__name__)

_PIVOT_TOL = 1e-10
_FEASIBILITY_TOL = 1e-9
_DEGENERATE_RUN = 50


class LPStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPProblem:
    c: NDArray[np.float64]
    A_ub: NDArray[np.float64] | None = None
    b_ub: NDArray[np.float64] | None = None
    A_eq: NDArray[np.float64] | None = None
    b_eq: NDArray[np.float64] | None = None
    bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        object.__setattr__(self, "c", c)
        for a_name, b_name in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            A, b = getattr(self, a_name), getattr(self, b_name)
            if A is None and b is None:
                A, b = np.zeros((0, n)), np.zeros(0)
            elif A is None or b is None:
                raise InvalidParameterError(f"{a_name} and {b_name} must be given together")
            A = np.asarray(A, dtype=float).reshape(-1, n)
            b = np.asarray(b, dtype=float).ravel()
            if A.shape[0] != b.size:
                raise InvalidParameterError(f"{a_name} has {A.shape[0]} rows but {b_name} has {b.size} entries")
            object.__setattr__(self, a_name, A)
            object.__setattr__(self, b_name, b)
        bounds = self.bounds if self.bounds is not None else ((0.0, np.inf),) * n
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(bounds) != n:
            raise InvalidParameterError(f"expected {n} bounds, got {len(bounds)}")
        if any(lo > hi or lo == np.inf or hi == -np.inf for lo, hi in bounds):
            raise InvalidParameterError("every bound must satisfy lb <= ub")
        object.__setattr__(self, "bounds", bounds)

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    objective: float | None = None
    x: NDArray[np.float64] | None = field(default=None, repr=False)
    iterations: int = 0


def _nonnegative_form(problem: LPProblem) -> tuple[NDArray, NDArray, list[NDArray], list[float]]:
    """x = offset + T @ y with y >= 0, plus upper-bound rows on y."""
    n = problem.n_vars
    offset = np.zeros(n)
    columns: list[NDArray] = []
    extra_rows: list[int] = []
    extra_rhs: list[float] = []
    for j, (lo, hi) in enumerate(problem.bounds):
        unit = np.zeros(n)
        unit[j] = 1.0
        if np.isfinite(lo):
            offset[j] = lo
            columns.append(unit)
            if np.isfinite(hi):
                extra_rows.append(len(columns) - 1)
                extra_rhs.append(hi - lo)
        elif np.isfinite(hi):
            offset[j] = hi
            columns.append(-unit)
        else:
            columns.append(unit)
            columns.append(-unit)
    T = np.column_stack(columns) if columns else np.zeros((n, 0))
    bound_rows = []
    for col in extra_rows:
        row = np.zeros(T.shape[1])
        row[col] = 1.0
        bound_rows.append(row)
    return offset, T, bound_rows, extra_rhs


class _Tableau:
    """Rows are constraints, the last row is the reduced-cost row, the last column the rhs."""

    def __init__(self, T: NDArray, basis: list[int], max_iterations: int) -> None:
        self.T = T
        self.basis = basis
        self.max_iterations = max_iterations
        self.iterations = 0
        self.bland = False
        self._degenerate = 0

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        self.basis[row] = col
        self.iterations += 1

    def _enter(self, allowed: NDArray[np.bool_]) -> int:
        reduced = self.T[-1, :-1]
        candidates = np.flatnonzero((reduced < -_PIVOT_TOL) & allowed)
        if candidates.size == 0:
            return -1
        if self.bland:
            return int(candidates[0])
        return int(candidates[np.argmin(reduced[candidates])])

    def _leave(self, col: int) -> int:
        column, rhs = self.T[:-1, col], self.T[:-1, -1]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:
            return -1
        ratios = np.maximum(rhs[rows], 0.0) / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _PIVOT_TOL * max(1.0, abs(best))]
        if self.bland:
            return int(min(ties, key=lambda r: self.basis[r]))
        # largest pivot element among the tied rows
        return int(ties[np.argmax(column[ties])])

    def run(self, allowed: NDArray[np.bool_]) -> LPStatus:
        while True:
            col = self._enter(allowed)
            if col < 0:
                return LPStatus.OPTIMAL
            row = self._leave(col)
            if row < 0:
                return LPStatus.UNBOUNDED
            if self.iterations >= self.max_iterations:
                raise SolverError(f"simplex exceeded {self.max_iterations} pivots")
            if self.T[row, -1] <= _PIVOT_TOL:
                self._degenerate += 1
                if self._degenerate >= _DEGENERATE_RUN and not self.bland:
                    logger.debug("switching to Bland's rule after %d degenerate pivots", self._degenerate)
                    self.bland = True
            else:
                self._degenerate = 0
            self.pivot(row, col)


def _equilibrate(A: NDArray, b: NDArray) -> tuple[NDArray, NDArray]:
    """Scale each row to unit max-norm; all-zero rows are left alone."""
    if A.shape[0] == 0:
        return A, b
    scale = np.abs(A).max(axis=1)
    scale[scale == 0.0] = 1.0
    return A / scale[:, None], b / scale


def lp_solve(problem: LPProblem, *, max_iterations: int | None = None) -> LPResult:
    max_iterations = settings.lp_max_iterations if max_iterations is None else max_iterations
    offset, Tmap, bound_rows, bound_rhs = _nonnegative_form(problem)
    ny = Tmap.shape[1]

    A_ub = problem.A_ub @ Tmap
    b_ub = problem.b_ub - problem.A_ub @ offset
    if bound_rows:
        A_ub = np.vstack([A_ub, np.array(bound_rows)])
        b_ub = np.concatenate([b_ub, np.array(bound_rhs)])
    A_eq = problem.A_eq @ Tmap
    b_eq = problem.b_eq - problem.A_eq @ offset

    A_ub, b_ub = _equilibrate(A_ub, b_ub)
    A_eq, b_eq = _equilibrate(A_eq, b_eq)

    # rows with b >= 0: "<=" keeps a slack, ">=" gets a surplus and an artificial
    rows, rhs, kinds = [], [], []
    for a, b in zip(A_ub, b_ub):
        rows.append(a if b >= 0 else -a)
        rhs.append(abs(b))
        kinds.append("le" if b >= 0 else "ge")
    for a, b in zip(A_eq, b_eq):
        rows.append(a if b >= 0 else -a)
        rhs.append(abs(b))
        kinds.append("eq")
    m = len(rows)
    n_slack = sum(k in ("le", "ge") for k in kinds)
    n_art = sum(k in ("ge", "eq") for k in kinds)
    total = ny + n_slack + n_art
    art_start = ny + n_slack

    T = np.zeros((m + 1, total + 1))
    basis: list[int] = []
    si, ai = ny, art_start
    for i, (a, b, kind) in enumerate(zip(rows, rhs, kinds)):
        T[i, :ny] = a
        T[i, -1] = b
        if kind == "le":
            T[i, si] = 1.0
            basis.append(si)
            si += 1
        else:
            if kind == "ge":
                T[i, si] = -1.0
                si += 1
            T[i, ai] = 1.0
            basis.append(ai)
            ai += 1

    tableau = _Tableau(T, basis, max_iterations)
    allowed = np.ones(total, dtype=bool)

    if n_art:
        # phase 1: minimize the sum of artificials
        T[-1, :] = 0.0
        T[-1, art_start:total] = 1.0
        for r, col in enumerate(basis):
            if col >= art_start:
                T[-1] -= T[r]
        tableau.run(allowed)
        residual_tol = _FEASIBILITY_TOL * max(1, m) * max(1.0, float(np.abs(rhs).max(initial=0.0)))
        if -T[-1, -1] > residual_tol:
            logger.debug("lp infeasible: phase 1 residual %.3g", -T[-1, -1])
            return LPResult(LPStatus.INFEASIBLE, iterations=tableau.iterations)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for r in range(m):
            if tableau.basis[r] >= art_start:
                cols = np.flatnonzero(np.abs(T[r, :art_start]) > _PIVOT_TOL)
                if cols.size == 0:
                    continue
                tableau.pivot(r, int(cols[np.argmax(np.abs(T[r, cols]))]))
            keep.append(r)
        if len(keep) < m:
            tableau.T = T = np.vstack([T[keep], T[-1:]])
            tableau.basis = [tableau.basis[r] for r in keep]
        allowed[art_start:] = False
        T[:-1, art_start:total] = 0.0

    # phase 2: reduced costs of c on the current basis
    cost = np.zeros(total)
    cost[:ny] = problem.c @ Tmap
    T[-1, :] = 0.0
    T[-1, :total] = cost
    for r, col in enumerate(tableau.basis):
        if cost[col] != 0.0:
            T[-1] -= cost[col] * T[r]
    status = tableau.run(allowed)
    if status is LPStatus.UNBOUNDED:
        return LPResult(LPStatus.UNBOUNDED, iterations=tableau.iterations)

    y = np.zeros(total)
    for r, col in enumerate(tableau.basis):
        y[col] = T[r, -1]
    x = offset + Tmap @ y[:ny]
    return LPResult(LPStatus.OPTIMAL, float(problem.c @ x), x, tableau.iterations)
