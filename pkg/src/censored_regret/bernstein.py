"""Binomial tail polynomials and the per-piece BSAA regret kernel Psi."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import betainc

from censored_regret.core import quantile_rank
from censored_regret.errors import InvalidParameterError


def bernstein_tail_array(r: int, n: int, p: ArrayLike) -> NDArray[np.float64]:
    """P(Binomial(n, p) >= r), elementwise in p.

    Uses the identity with the regularized incomplete beta function I_p(r, n - r + 1),
    which stays accurate in both tails where direct summation cancels.
    """
    if n < 0:
        raise InvalidParameterError(f"n must be nonnegative, got {n!r}")
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    if r <= 0:
        return np.ones_like(p)
    if r > n:
        return np.zeros_like(p)
    return betainc(r, n - r + 1, p)


def bernstein_tail(r: int, n: int, p: float) -> float:
    return float(bernstein_tail_array(r, n, p))


@dataclass(frozen=True)
class PsiSpec:
    n_total: int
    sigma: int
    q: float

    def __post_init__(self) -> None:
        if self.n_total < 1:
            raise InvalidParameterError(f"n_total must be at least 1, got {self.n_total!r}")
        if not 0 <= self.sigma <= self.n_total:
            raise InvalidParameterError(f"sigma must lie in [0, {self.n_total}], got {self.sigma!r}")
        if not 0.0 < self.q < 1.0:
            raise InvalidParameterError(f"q must lie in (0, 1), got {self.q!r}")

    @property
    def r(self) -> int:
        return quantile_rank(self.q, self.n_total) - self.sigma

    @property
    def m(self) -> int:
        return self.n_total - self.sigma


def psi_bsaa_array(spec: PsiSpec, v: ArrayLike) -> NDArray[np.float64]:
    v = np.asarray(v, dtype=float)
    tail = bernstein_tail_array(spec.r, spec.m, v)
    return (1.0 - tail) * (v - spec.q) + np.maximum(spec.q - v, 0.0)


def psi_bsaa(spec: PsiSpec, v: float) -> float:
    return float(psi_bsaa_array(spec, v))


def psi_lipschitz_bound(n_total: int) -> float:
    return float(n_total + 2)
