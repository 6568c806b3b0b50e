"""One-dimensional maximization helpers shared by the worst-case searches."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from numpy.typing import NDArray

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_max(f: Callable[[float], float], a: float, b: float, iterations: int) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal f on [a, b].

    Returns (argmax, value); ties keep the left point.
    """
    if b <= a:
        return a, f(a)
    h = b - a
    c, d = a + INV_PHI_SQ * h, a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(iterations):
        h *= INV_PHI
        if yc >= yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * h
            yd = f(d)
    return (c, yc) if yc >= yd else (d, yd)


def refine_max(
    f: Callable[[float], float],
    x0: float,
    y0: float,
    lo: float,
    hi: float,
    radius: float,
    *,
    iterations: int,
    rounds: int = 3,
) -> tuple[float, float]:
    """Polish a grid maximizer (x0, y0) with golden-section rounds of shrinking radius.

    The result is never worse than (x0, y0).
    """
    best_x, best_y = x0, y0
    for _ in range(rounds):
        a, b = max(lo, best_x - radius), min(hi, best_x + radius)
        x, y = golden_section_max(f, a, b, iterations)
        if y > best_y:
            best_x, best_y = x, y
        radius /= 2.0
    return best_x, best_y


def running_argmax(values: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.intp]]:
    """Prefix maxima of `values` and the first index attaining each of them."""
    running = np.maximum.accumulate(values)
    previous = np.concatenate(([-np.inf], running[:-1]))
    index = np.where(values > previous, np.arange(values.size), 0)
    return running, np.maximum.accumulate(index)
