"""Data-to-decision rules on censored samples.

The scalar functions work on a SampleSet and are the reference definitions. The
``*_batch`` variants take a matrix of raw demand tuples (one row per replay),
censor them against a design and return one order quantity per row; the oracles
use them.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from censored_regret.core import TOL, CensoringDesign, Observation, SampleSet, StepCDF, quantile_rank
from censored_regret.errors import InvalidInputError, InvalidParameterError


class Policy(StrEnum):
    BSAA = "bsaa"
    KM = "km"


@dataclass(frozen=True)
class KMEstimate:
    cdf: StepCDF
    ordered: tuple[Observation, ...]


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"critical fractile must lie in (0, 1), got {q!r}")


def _pooled(samples: SampleSet) -> list[Observation]:
    pooled = samples.pooled()
    if not pooled:
        raise InvalidInputError("empty sample set")
    return pooled


def bsaa_decide(samples: SampleSet, q: float) -> float:
    """Lower empirical q-quantile of the sales; censoring flags are ignored."""
    _check_q(q)
    sales = sorted(obs.sale for obs in _pooled(samples))
    return sales[quantile_rank(q, len(sales)) - 1]


def km_cdf(samples: SampleSet) -> KMEstimate:
    """Product-limit estimate with uncensored observations ahead of censored ties.

    The survival product telescopes, so it is kept as an exact fraction; without
    censoring the step values are then exactly i/n.
    """
    ordered = sorted(_pooled(samples), key=lambda o: (o.sale, not o.uncensored))
    n = len(ordered)
    survival = Fraction(1)
    support: list[float] = []
    values: list[Fraction] = []
    for i, obs in enumerate(ordered, start=1):
        if obs.uncensored:
            survival *= Fraction(n - i, n - i + 1)
        if support and support[-1] == obs.sale:
            values[-1] = 1 - survival
        else:
            support.append(obs.sale)
            values.append(1 - survival)
    if support[-1] == 1.0:
        values[-1] = Fraction(1)
    else:
        support.append(1.0)
        values.append(Fraction(1))
    cdf = StepCDF(tuple(support), tuple(float(v) for v in values))
    return KMEstimate(cdf=cdf, ordered=tuple(ordered))


def km_decide(samples: SampleSet, q: float) -> float:
    _check_q(q)
    return km_cdf(samples).cdf.quantile(q)


def censor_batch(design: CensoringDesign, demands: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Sales and uncensored flags for a (replays, n) demand matrix, columns in design order."""
    d = np.atleast_2d(np.asarray(demands, dtype=float))
    if d.shape[1] != design.n:
        raise InvalidInputError(f"expected {design.n} demands per row, got {d.shape[1]}")
    levels = design.sample_levels()
    return np.minimum(d, levels), d <= levels


def bsaa_decide_batch(design: CensoringDesign, demands: ArrayLike, q: float) -> NDArray[np.float64]:
    _check_q(q)
    sales, _ = censor_batch(design, demands)
    rank = quantile_rank(q, design.n)
    return np.partition(sales, rank - 1, axis=1)[:, rank - 1]


def km_decide_batch(design: CensoringDesign, demands: ArrayLike, q: float) -> NDArray[np.float64]:
    _check_q(q)
    sales, uncensored = censor_batch(design, demands)
    n = design.n
    # lexsort is stable: sale first, uncensored before censored on ties
    order = np.lexsort((~uncensored, sales), axis=1)
    ys = np.take_along_axis(sales, order, axis=1)
    zeta = np.take_along_axis(uncensored, order, axis=1)
    i = np.arange(1, n + 1)
    factors = np.where(zeta, (n - i) / (n - i + 1), 1.0)
    reached = 1.0 - np.cumprod(factors, axis=1) >= q - TOL
    first = reached.argmax(axis=1)
    rows = np.arange(ys.shape[0])
    return np.where(reached.any(axis=1), ys[rows, first], 1.0)


BatchPolicy = Callable[[CensoringDesign, ArrayLike, float], NDArray[np.float64]]

BATCH_POLICIES: dict[Policy, BatchPolicy] = {
    Policy.BSAA: bsaa_decide_batch,
    Policy.KM: km_decide_batch,
}
