from censored_regret.design.exploration import (
    DesignOptResult,
    delta1_lower_bound,
    grid_lp,
    n_max,
    solve_design,
    uncensored_benchmark,
)
from censored_regret.design.lp import LPProblem, LPResult, LPStatus, lp_solve

__all__ = [
    "DesignOptResult",
    "LPProblem",
    "LPResult",
    "LPStatus",
    "delta1_lower_bound",
    "grid_lp",
    "lp_solve",
    "n_max",
    "solve_design",
    "uncensored_benchmark",
]
