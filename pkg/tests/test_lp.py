from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from censored_regret.design.lp import LPProblem, LPStatus, lp_solve
from censored_regret.errors import InvalidParameterError, SolverError


def test_single_lower_bound():
    result = lp_solve(LPProblem(c=[1.0], A_ub=[[-1.0]], b_ub=[-3.0]))
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(3.0)
    assert result.x.tolist() == pytest.approx([3.0])


def test_symmetric_epigraph():
    # variables (x, t): t >= x, t >= 1 - x, 0 <= x <= 1
    problem = LPProblem(
        c=[0.0, 1.0],
        A_ub=[[1.0, -1.0], [-1.0, -1.0]],
        b_ub=[0.0, -1.0],
        bounds=((0.0, 1.0), (0.0, np.inf)),
    )
    result = lp_solve(problem)
    assert result.objective == pytest.approx(0.5)
    assert result.x[0] == pytest.approx(0.5)


def test_equality_constraint():
    result = lp_solve(LPProblem(c=[1.0, 1.0], A_eq=[[1.0, 2.0]], b_eq=[4.0]))
    assert result.objective == pytest.approx(2.0)
    assert result.x.tolist() == pytest.approx([0.0, 2.0])


def test_free_and_upper_bounded_variables():
    result = lp_solve(LPProblem(c=[1.0], A_ub=[[-1.0]], b_ub=[5.0], bounds=((-np.inf, np.inf),)))
    assert result.objective == pytest.approx(-5.0)
    result = lp_solve(LPProblem(c=[-1.0], bounds=((-np.inf, 2.5),)))
    assert result.objective == pytest.approx(-2.5)


def test_infeasible():
    result = lp_solve(LPProblem(c=[1.0], A_ub=[[1.0], [-1.0]], b_ub=[1.0, -2.0]))
    assert result.status is LPStatus.INFEASIBLE
    assert result.x is None


def test_unbounded():
    assert lp_solve(LPProblem(c=[-1.0])).status is LPStatus.UNBOUNDED


def test_redundant_equalities():
    problem = LPProblem(c=[1.0, 2.0], A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0])
    result = lp_solve(problem)
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(1.0)


def test_iteration_limit():
    problem = LPProblem(c=[-1.0, -1.0], A_ub=[[1.0, 0.0], [0.0, 1.0]], b_ub=[1.0, 1.0])
    with pytest.raises(SolverError):
        lp_solve(problem, max_iterations=1)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"c": [1.0, 1.0], "A_ub": [[1.0, 1.0]]},
        {"c": [1.0], "A_ub": [[1.0]], "b_ub": [1.0, 2.0]},
        {"c": [1.0], "bounds": ((2.0, 1.0),)},
        {"c": [1.0, 1.0], "bounds": ((0.0, 1.0),)},
    ],
)
def test_problem_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        LPProblem(**kwargs)


def _vertex_minimum(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> float:
    """Minimum of c @ x over the box-constrained polytope, by enumerating every basic solution."""
    n = c.size
    G = np.vstack([A, -np.eye(n), np.eye(n)])
    h = np.concatenate([b, np.zeros(n), np.ones(n)])
    best = np.inf
    for rows in itertools.combinations(range(G.shape[0]), n):
        sub = G[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-9:
            continue
        x = np.linalg.solve(sub, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, float(c @ x))
    return best


@st.composite
def box_lps(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(1, 4))
    c = np.array(draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n)), dtype=float)
    A = np.array(
        draw(st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=m, max_size=m)),
        dtype=float,
    )
    b = np.array(draw(st.lists(st.integers(0, 5), min_size=m, max_size=m)), dtype=float)
    return c, A, b


@settings(max_examples=60, deadline=None)
@given(lp=box_lps())
def test_matches_vertex_enumeration(lp):
    c, A, b = lp
    result = lp_solve(LPProblem(c=c, A_ub=A, b_ub=b, bounds=((0.0, 1.0),) * c.size))
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(_vertex_minimum(c, A, b), abs=1e-7)
    assert np.all(A @ result.x <= b + 1e-9)
    assert np.all((result.x >= -1e-9) & (result.x <= 1.0 + 1e-9))


@settings(max_examples=60, deadline=None)
@given(lp=box_lps(), data=st.data())
def test_matches_highs(lp, data):
    c, A, b = lp
    rhs = data.draw(st.lists(st.integers(-3, 5), min_size=b.size, max_size=b.size))
    b = np.array(rhs, dtype=float)
    result = lp_solve(LPProblem(c=c, A_ub=A, b_ub=b, bounds=((0.0, 1.0),) * c.size))
    reference = linprog(c, A_ub=A, b_ub=b, bounds=[(0.0, 1.0)] * c.size, method="highs")
    if reference.status == 2:
        assert result.status is LPStatus.INFEASIBLE
    else:
        assert result.status is LPStatus.OPTIMAL
        assert result.objective == pytest.approx(reference.fun, abs=1e-7)


def test_badly_scaled_rows_are_feasible():
    # rhs and coefficients near the phase-1 residual scale
    problem = LPProblem(c=[1.0, 0.0], A_ub=[[-2.3e-6, 0.0], [0.0, 1e4]], b_ub=[-1e-6, 3e4], bounds=((0.0, 1.0), (0.0, None)))
    result = lp_solve(problem)
    assert result.status is LPStatus.OPTIMAL
    assert result.x[0] == pytest.approx(1e-6 / 2.3e-6, rel=1e-8)


def test_degenerate_stack_of_cuts():
    # many constraints tight at the optimum vertex
    n = 6
    rows = [np.eye(n)[i] - np.eye(n)[i + 1] for i in range(n - 1)] + [np.ones(n)]
    rows += [np.ones(n) * k / 10.0 for k in range(1, 30)]
    b = [0.0] * (n - 1) + [3.0] + [3.0 * k / 10.0 for k in range(1, 30)]
    result = lp_solve(LPProblem(c=-np.arange(1.0, n + 1), A_ub=rows, b_ub=b, bounds=((0.0, 1.0),) * n))
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(-(4.0 + 5.0 + 6.0))
