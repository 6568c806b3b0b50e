"""Budget-constrained exploratory inventory design for BSAA.

A design with N unit-count samples at levels x_1 <= ... <= x_N has worst-case
regret max_i [max_v A_i(x, v) + max_w B_i(x, w)], where A_i and B_i are affine in
x for fixed v and w. Restricting v and w to grids gives an epigraph LP per N,
solved here by constraint generation: only the most violated grid point per
crossing is added as a cut each round.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from censored_regret.bernstein import PsiSpec, psi_bsaa_array
from censored_regret.config import settings
from censored_regret.core import CensoringDesign, CostParameters, GridSpec, quantile_rank, uniform_grid
from censored_regret.design.lp import LPProblem, LPStatus, lp_solve
from censored_regret.errors import CapacityError, InvalidParameterError, SolverError, UnsupportedRegimeError
from censored_regret.regret.bsaa import worst_case_regret_bsaa
from censored_regret.telemetry import get_tracer

logger = logging.getLogger(__name__)
tracer = get_tracer()

_CUT_TOL = 1e-10
_MAX_ROUNDS = 1_000


@dataclass(frozen=True)
class DesignOptResult:
    budget: int
    n_star: int
    levels: tuple[float, ...]
    value: float
    u_bar: float
    n_max: int

    @property
    def design(self) -> CensoringDesign:
        return CensoringDesign(self.levels, (1,) * self.n_star)


def _check_regime(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"critical fractile must lie in (0, 1), got {q!r}")
    if q < 0.5:
        raise UnsupportedRegimeError(f"design optimization assumes q >= 0.5, got q={q!r}")


def uncensored_benchmark(B: int, q: float, *, tol: float | None = None) -> float:
    """Worst-case BSAA regret when the whole budget buys B uncensored samples."""
    _check_regime(q)
    if B < 1:
        raise InvalidParameterError(f"budget must be at least 1, got {B!r}")
    return worst_case_regret_bsaa(CensoringDesign((1.0,), (B,)), CostParameters.normalized(q), tol).value


def n_max_from_benchmark(B: int, q: float, u_bar: float) -> int:
    return math.ceil(B / ((1.0 - q) * (1.0 - u_bar / q)))


def n_max(B: int, q: float, *, tol: float | None = None) -> int:
    """Sample sizes beyond this bound cannot beat the uncensored benchmark."""
    return n_max_from_benchmark(B, q, uncensored_benchmark(B, q, tol=tol))


def delta1_lower_bound(N: int, B: int, q: float) -> float:
    """Regret lower bound for any N-sample design with total inventory B."""
    if N < 1:
        raise InvalidParameterError(f"N must be at least 1, got {N!r}")
    return q * (1.0 - min(1.0, B / (N - quantile_rank(q, N) + 1)))


def _unit_psi(N: int, q: float, t: NDArray[np.float64]) -> NDArray[np.float64]:
    """psi_k at sigma_k = k for k = 0..N; shape (N + 1, len(t))."""
    return np.vstack([psi_bsaa_array(PsiSpec(N, k, q), t) for k in range(N + 1)])


def _crossing_values(x: NDArray[np.float64], P_v: NDArray, P_w: NDArray) -> tuple[NDArray, NDArray]:
    """A_i(x, v) and B_i(x, w) on the grids; row i + 1 is crossing i = -1..N."""
    lengths = np.diff(np.concatenate(([0.0], x, [1.0])))
    weighted_v = P_v * lengths[:, None]
    weighted_w = P_w * lengths[:, None]
    head = np.vstack([np.zeros((1, P_v.shape[1])), np.cumsum(weighted_v, axis=0)])
    tail = np.vstack([np.flip(np.cumsum(np.flip(weighted_w, 0), axis=0), 0), np.zeros((1, P_w.shape[1]))])
    return head, tail


def _cut(N: int, psi_col: NDArray[np.float64], pieces: range) -> tuple[NDArray[np.float64], float]:
    """Coefficients on x_1..x_N and constant of sum_{k in pieces} (x_{k+1} - x_k) psi_k."""
    coef = np.zeros(N)
    const = 0.0
    for k in pieces:
        if k + 1 <= N:
            coef[k] += psi_col[k]
        else:
            const += psi_col[k]
        if k >= 1:
            coef[k - 1] -= psi_col[k]
    return coef, const


def grid_lp(N: int, B: float, q: float, grid: GridSpec) -> tuple[float, tuple[float, ...]]:
    """Grid-restricted minimum worst-case regret over N-sample designs with sum x <= B.

    Every A_i and B_i lies in [0, 1], so the epigraph variables are stored as
    complements: t = 2 - s, alpha_i = 1 - a_i, beta_i = 1 - b_i. All right-hand
    sides are then nonnegative and the origin is feasible, so the simplex starts
    from the slack basis. Variables are ordered (x_1..x_N, s, a_{-1..N}, b_{-1..N}).
    """
    if N < 1:
        raise InvalidParameterError(f"N must be at least 1, got {N!r}")
    if B < 0:
        raise InvalidParameterError(f"budget must be nonnegative, got {B!r}")
    V = uniform_grid(0.0, q, grid.mesh_v)
    W = uniform_grid(q, 1.0, grid.mesh_w)
    P_v, P_w = _unit_psi(N, q, V), _unit_psi(N, q, W)
    crossings = N + 2
    s_col = N
    a0 = N + 1
    b0 = a0 + crossings
    n_vars = b0 + crossings

    c = np.zeros(n_vars)
    c[s_col] = -1.0
    base_rows, base_rhs = [], []
    for j in range(N - 1):
        row = np.zeros(n_vars)
        row[j], row[j + 1] = 1.0, -1.0
        base_rows.append(row)
        base_rhs.append(0.0)
    row = np.zeros(n_vars)
    row[:N] = 1.0
    base_rows.append(row)
    base_rhs.append(float(B))
    for i in range(crossings):
        row = np.zeros(n_vars)
        row[a0 + i] = row[b0 + i] = -1.0
        row[s_col] = 1.0
        base_rows.append(row)
        base_rhs.append(0.0)
    bounds = ((0.0, 1.0),) * N + ((0.0, 2.0),) + ((0.0, 1.0),) * (2 * crossings)

    cut_rows: list[NDArray] = []
    cut_rhs: list[float] = []
    seen: set[tuple[str, int, int]] = set()

    def add_cut(coef: NDArray[np.float64], const: float, col: int) -> None:
        row = np.zeros(n_vars)
        row[:N] = coef
        row[col] = 1.0
        cut_rows.append(row)
        cut_rhs.append(1.0 - const)

    with tracer.start_as_current_span("design.grid_lp") as span:
        span.set_attribute("design.N", N)
        span.set_attribute("design.grid_points", int(V.size + W.size))
        for rounds in range(1, _MAX_ROUNDS + 1):
            problem = LPProblem(c, np.array(base_rows + cut_rows), np.array(base_rhs + cut_rhs), bounds=bounds)
            result = lp_solve(problem)
            if result.status is not LPStatus.OPTIMAL:
                raise SolverError(f"grid LP for N={N} ended {result.status}")
            x = np.maximum.accumulate(np.clip(result.x[:N], 0.0, 1.0))
            alpha = 1.0 - result.x[a0:a0 + crossings]
            beta = 1.0 - result.x[b0:b0 + crossings]
            head, tail = _crossing_values(x, P_v, P_w)

            added = 0
            for i in range(crossings):
                crossing = i - 1
                jv, jw = int(np.argmax(head[i])), int(np.argmax(tail[i]))
                if head[i, jv] > alpha[i] + _CUT_TOL and ("v", i, jv) not in seen:
                    seen.add(("v", i, jv))
                    add_cut(*_cut(N, P_v[:, jv], range(0, crossing + 1)), a0 + i)
                    added += 1
                if tail[i, jw] > beta[i] + _CUT_TOL and ("w", i, jw) not in seen:
                    seen.add(("w", i, jw))
                    add_cut(*_cut(N, P_w[:, jw], range(crossing + 1, N + 1)), b0 + i)
                    added += 1
            if added == 0:
                value = float(np.max(head.max(axis=1) + tail.max(axis=1)))
                span.set_attribute("design.rounds", rounds)
                span.set_attribute("design.cuts", len(cut_rows))
                logger.debug("grid LP N=%d: value %.6g after %d rounds, %d cuts", N, value, rounds, len(cut_rows))
                return value, tuple(x.tolist())
        raise SolverError(f"grid LP for N={N} did not converge in {_MAX_ROUNDS} rounds")


def solve_design(B: int, q: float, eps: float, *, n_max_cap: int | None = None) -> DesignOptResult:
    _check_regime(q)
    if B < 1:
        raise InvalidParameterError(f"budget must be at least 1, got {B!r}")
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps!r}")
    cap = settings.n_max_cap if n_max_cap is None else n_max_cap

    with tracer.start_as_current_span("design.solve_design") as span:
        t0 = time.perf_counter()
        span.set_attribute("design.budget", B)
        span.set_attribute("design.q", q)
        u_bar = uncensored_benchmark(B, q, tol=eps / 4.0)
        bound = n_max_from_benchmark(B, q, u_bar)
        span.set_attribute("design.n_max", bound)
        if bound > cap:
            raise CapacityError(f"N_max = {bound} exceeds the cap of {cap}; raise --n-max-cap or the budget")
        grid = GridSpec.for_design(eps, bound)

        best: tuple[float, int, tuple[float, ...]] | None = None
        for N in range(1, bound + 1):
            value, levels = grid_lp(N, B, q, grid)
            logger.info("N=%d grid value %.6g", N, value)
            if best is None or value < best[0]:
                best = (value, N, levels)

        value, n_star, levels = best
        span.set_attribute("design.n_star", n_star)
        span.set_attribute("design.elapsed_ms", int((time.perf_counter() - t0) * 1000))
        return DesignOptResult(budget=B, n_star=n_star, levels=levels, value=value, u_bar=u_bar, n_max=bound)
