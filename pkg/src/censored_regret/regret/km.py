"""Exact worst-case regret of the Kaplan-Meier policy under a censoring design.

On piece k, i.e. for z in [x_k, x_{k+1}), the event {KM orders at most z} depends
on the data only through a count profile: N_j uncensored sales in the j-th cell
cut out by the levels x_1..x_k and z, and C_j samples censored at x_j. The profile
is a deterministic function of one multinomial draw per level at or below x_k and
one pooled draw for the samples above, so P(KM <= z) is a finite sum over those
draws. `KMActionModel` enumerates the draws once per (design, k) and evaluates
the sum for any CDF levels f_1 <= ... <= f_k <= v.

The worst case maximizes sum_k (x_{k+1} - x_k) Psi_k(f_1..f_k, f_k+) over the
monotone chain f_0+ <= f_1 <= f_1+ <= ... <= f_K+ on a lattice. Given the f's the
f_k+ decouple, so the search enumerates f's and takes running maxima for f+.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln, xlogy

from censored_regret.bernstein import bernstein_tail_array
from censored_regret.config import settings
from censored_regret.core import (
    TOL,
    CensoringDesign,
    CostParameters,
    GridSpec,
    StepCDF,
    quantile_rank,
    uniform_grid,
)
from censored_regret.errors import CapacityError, InvalidParameterError
from censored_regret.regret.certificate import MonotonePoint, RegretCertificate
from censored_regret.regret.search import running_argmax
from censored_regret.telemetry import get_tracer

logger = logging.getLogger(__name__)
tracer = get_tracer()

# Offset of the f_k+ atom to the right of x_k in witness distributions.
WITNESS_OFFSET = 1e-9

_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class CountProfile:
    """Uncensored counts per cell (N_1..N_{k+1}) and censored counts per level (C_1..C_k)."""

    N: tuple[int, ...]
    C: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.N) != len(self.C) + 1:
            raise InvalidParameterError("a count profile has one more uncensored cell than levels")
        if any(c < 0 for c in self.N + self.C):
            raise InvalidParameterError("counts must be nonnegative")

    def survival(self, n: int) -> float:
        """Product-limit survival just right of the last cell, G_k(N, C)."""
        if sum(self.N) + sum(self.C) > n:
            raise InvalidParameterError("count profile exceeds the sample size")
        return float(_survival(n, [np.asarray(c) for c in self.N], [np.asarray(c) for c in self.C]))


def _survival(n: int, N: Sequence[NDArray], C: Sequence[NDArray]) -> NDArray:
    """Vectorized G_k over profiles; cells with an empty risk set contribute 1."""
    g = np.ones(np.shape(N[0]))
    seen_n = np.zeros(np.shape(N[0]), dtype=np.int64)
    seen_c = np.zeros(np.shape(N[0]), dtype=np.int64)
    for j, n_j in enumerate(N):
        at_risk = n - seen_n - seen_c
        safe = np.where(at_risk > 0, at_risk, 1)
        g = g * np.where(at_risk > 0, (at_risk - n_j) / safe, 1.0)
        seen_n = seen_n + n_j
        if j < len(C):
            seen_c = seen_c + C[j]
    return g


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _composition_array(total: int, parts: int) -> NDArray[np.int64]:
    return np.array(list(_compositions(total, parts)), dtype=np.int64).reshape(-1, parts)


def _log_multinomial(total: int, counts: NDArray[np.int64]) -> NDArray[np.float64]:
    return gammaln(total + 1) - gammaln(counts + 1).sum(axis=1)


@dataclass(frozen=True)
class _PieceTable:
    """Every multinomial draw for one piece k, laid out column-wise.

    left[l - 1] has columns (above x_l, cell 1, ..., cell l) for the samples at
    level l; right has columns (above z, cell 1, ..., cell k, (x_k, z]) for the
    pooled samples above x_k.
    """

    left: tuple[NDArray[np.int64], ...]
    right: NDArray[np.int64]
    log_coef: NDArray[np.float64]
    hit: NDArray[np.bool_]
    n_right: int


class KMActionModel:
    """Distribution of the KM action on each piece of one design.

    Draw tables are built lazily per piece and reused across evaluations.
    """

    def __init__(self, design: CensoringDesign, q: float, *, enumeration_cap: int | None = None) -> None:
        if not 0.0 < q < 1.0:
            raise InvalidParameterError(f"critical fractile must lie in (0, 1), got {q!r}")
        self.design = design
        self.q = q
        self.enumeration_cap = settings.km_enumeration_cap if enumeration_cap is None else enumeration_cap
        self._tables: dict[int, _PieceTable] = {}

    def n_right(self, k: int) -> int:
        return sum(self.design.counts[k:])

    def configuration_count(self, k: int) -> int:
        count = math.comb(self.n_right(k) + k + 1, k + 1)
        for ell in range(1, k + 1):
            count *= math.comb(self.design.counts[ell - 1] + ell, ell)
        return count

    def _table(self, k: int) -> _PieceTable:
        if k in self._tables:
            return self._tables[k]
        count = self.configuration_count(k)
        if count > self.enumeration_cap:
            raise CapacityError(
                f"piece {k} needs {count} count configurations, above the cap of {self.enumeration_cap}"
            )
        with tracer.start_as_current_span("km.build_piece_table") as span:
            span.set_attribute("km.piece", k)
            span.set_attribute("km.configurations", count)
            n_right = self.n_right(k)
            blocks = [_composition_array(self.design.counts[ell - 1], ell + 1) for ell in range(1, k + 1)]
            blocks.append(_composition_array(n_right, k + 2))
            index = np.indices([len(b) for b in blocks]).reshape(len(blocks), -1)
            left = tuple(blocks[ell][index[ell]] for ell in range(k))
            right = blocks[k][index[k]]

            uncensored = []
            for j in range(1, k + 1):
                n_j = right[:, j].copy()
                for ell in range(j, k + 1):
                    n_j += left[ell - 1][:, j]
                uncensored.append(n_j)
            uncensored.append(right[:, k + 1])
            censored = [left[j - 1][:, 0] for j in range(1, k + 1)]
            g = _survival(self.design.n, uncensored, censored)

            log_coef = _log_multinomial(n_right, right)
            for ell in range(1, k + 1):
                log_coef = log_coef + _log_multinomial(self.design.counts[ell - 1], left[ell - 1])
            table = _PieceTable(left, right, log_coef, g <= 1.0 - self.q + TOL, n_right)
        logger.debug("km piece %d: %d configurations, %d hitting", k, count, int(table.hit.sum()))
        self._tables[k] = table
        return table

    def _weights(self, k: int, prefix: NDArray[np.float64], v: NDArray[np.float64], rows: NDArray[np.bool_] | None) -> NDArray:
        """Sum over the selected draws of their multinomial probabilities, for each v."""
        table = self._table(k)
        cells = np.clip(np.diff(np.concatenate(([0.0], prefix))), 0.0, 1.0)
        left = [b if rows is None else b[rows] for b in table.left]
        right = table.right if rows is None else table.right[rows]
        log_coef = table.log_coef if rows is None else table.log_coef[rows]

        fixed = log_coef.copy()
        for ell, block in enumerate(left, start=1):
            fixed += xlogy(block[:, 0], max(1.0 - prefix[ell - 1], 0.0))
            fixed += (xlogy(block[:, 1:], cells[:ell])).sum(axis=1)
        fixed += (xlogy(right[:, 1:k + 1], cells)).sum(axis=1)

        if table.n_right == 0:
            return np.full(v.shape, np.exp(fixed).sum())
        above, last = right[:, 0], right[:, k + 1]
        out = np.empty(v.shape)
        step = max(1, _CHUNK_CELLS // max(len(fixed), 1))
        for start in range(0, v.size, step):
            vs = v[start:start + step]
            log_p = (fixed[:, None]
                     + xlogy(above[:, None], np.clip(1.0 - vs, 0.0, 1.0)[None, :])
                     + xlogy(last[:, None], np.clip(vs - prefix[-1], 0.0, 1.0)[None, :]))
            out[start:start + step] = np.exp(log_p).sum(axis=0)
        return out

    def action_cdf(self, k: int, prefix: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
        """P(KM <= z) on piece k when F(x_j) = prefix[j-1] and F(z) = v, elementwise in v."""
        prefix, v = self._validate(k, prefix, v)
        if k == 0:
            return bernstein_tail_array(quantile_rank(self.q, self.design.n), self.design.n, v)
        table = self._table(k)
        if not table.hit.any():
            return np.zeros(v.shape)
        return np.clip(self._weights(k, prefix, v, table.hit), 0.0, 1.0)

    def total_mass(self, k: int, prefix: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
        """Sum of all draw probabilities; one up to rounding."""
        prefix, v = self._validate(k, prefix, v)
        if k == 0:
            return np.ones(v.shape)
        return self._weights(k, prefix, v, None)

    def psi(self, k: int, prefix: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return (1.0 - self.action_cdf(k, prefix, v)) * (v - self.q) + np.maximum(self.q - v, 0.0)

    def _validate(self, k: int, prefix: ArrayLike, v: ArrayLike) -> tuple[NDArray, NDArray]:
        if not 0 <= k <= self.design.K:
            raise InvalidParameterError(f"piece index must lie in [0, {self.design.K}], got {k!r}")
        prefix = np.asarray(prefix, dtype=float).ravel()
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if prefix.size != k:
            raise InvalidParameterError(f"piece {k} needs {k} CDF levels, got {prefix.size}")
        if np.any(prefix < -TOL) or np.any(prefix > 1.0 + TOL) or np.any(v < -TOL) or np.any(v > 1.0 + TOL):
            raise InvalidParameterError("CDF levels must lie in [0, 1]")
        if np.any(np.diff(prefix) < -TOL) or (k > 0 and np.any(v < prefix[-1] - TOL)):
            raise InvalidParameterError("CDF levels must satisfy f_1 <= ... <= f_k <= v")
        return np.clip(prefix, 0.0, 1.0), np.clip(v, 0.0, 1.0)


def km_action_cdf(design: CensoringDesign, q: float, k: int, f_prefix: Sequence[float], v: float,
                  *, model: KMActionModel | None = None) -> float:
    model = model or KMActionModel(design, q)
    return float(model.action_cdf(k, f_prefix, v)[0])


def km_total_mass(design: CensoringDesign, q: float, k: int, f_prefix: Sequence[float], v: float) -> float:
    return float(KMActionModel(design, q).total_mass(k, f_prefix, v)[0])


def psi_km(design: CensoringDesign, q: float, k: int, f_prefix: Sequence[float], v: float,
           *, model: KMActionModel | None = None) -> float:
    model = model or KMActionModel(design, q)
    return float(model.psi(k, f_prefix, v)[0])


@dataclass
class _LatticeBest:
    value: float
    fs: tuple[float, ...]
    f_plus: tuple[float, ...]


def _lattice_search(model: KMActionModel, grid: NDArray[np.float64]) -> _LatticeBest:
    """Maximize the piecewise objective over monotone chains with coordinates on `grid`."""
    design = model.design
    lengths = design.lengths
    levels = design.levels
    last = max(k for k, length in enumerate(lengths) if length > 0)

    def curve(k: int, prefix: tuple[float, ...], lo: int) -> tuple[NDArray, NDArray]:
        vs = grid[lo:]
        if lengths[k] > 0:
            values = lengths[k] * model.psi(k, prefix, vs)
        else:
            values = np.zeros(vs.size)
        running, where = running_argmax(values)
        return running, where + lo

    def best_from(k: int, prefix: tuple[float, ...], lo: int) -> _LatticeBest:
        # best over f_{k+1}, ..., with f_k = grid[lo] (or 0 for k = 0) already fixed
        running, where = curve(k, prefix, lo)
        if k == last:
            return _LatticeBest(float(running[-1]), (), (float(grid[where[-1]]),))
        if k >= 1 and levels[k] == levels[k - 1]:
            candidates = [lo]
        else:
            candidates = range(lo, grid.size)
        best: _LatticeBest | None = None
        for j in candidates:
            tail = best_from(k + 1, prefix + (float(grid[j]),), j)
            value = float(running[j - lo]) + tail.value
            if best is None or value > best.value:
                best = _LatticeBest(value, (float(grid[j]),) + tail.fs,
                                    (float(grid[where[j - lo]]),) + tail.f_plus)
        return best

    return best_from(0, (), 0)


def _monotone_point(design: CensoringDesign, best: _LatticeBest) -> MonotonePoint:
    fs = list(best.fs) + [1.0] * (design.K - len(best.fs))
    f_plus = list(best.f_plus) + [1.0] * (design.K + 1 - len(best.f_plus))
    return MonotonePoint(f_plus[0], tuple(zip(fs, f_plus[1:])))


def km_witness(design: CensoringDesign, point: MonotonePoint) -> StepCDF:
    """Step distribution with F(x_k) = f_k and F = f_k+ just right of x_k."""
    bp = design.breakpoints
    points, probs = [0.0], [point.f_plus_0]
    previous = point.f_plus_0
    for k, (f_k, f_plus_k) in enumerate(point.pairs, start=1):
        x_k = bp[k]
        points.append(x_k)
        probs.append(f_k - previous)
        gap = bp[k + 1] - x_k
        if f_plus_k > f_k and gap > 0:
            points.append(x_k + min(WITNESS_OFFSET, gap / 2.0))
            probs.append(f_plus_k - f_k)
            previous = f_plus_k
        else:
            previous = f_k
    points.append(1.0)
    probs.append(1.0 - previous)
    return StepCDF.from_atoms(points, np.clip(probs, 0.0, None))


def _refined_grid(coarse: NDArray[np.float64], best: _LatticeBest, mesh: float, factor: int) -> NDArray[np.float64]:
    centres = set(best.fs) | set(best.f_plus)
    pieces = [coarse]
    for c in sorted(centres):
        pieces.append(np.linspace(c - mesh, c + mesh, 2 * factor + 1))
    merged = np.clip(np.concatenate(pieces), 0.0, 1.0)
    return np.unique(np.round(merged, 12))


def worst_case_regret_km(
    design: CensoringDesign,
    cp: CostParameters,
    grid: GridSpec | None = None,
    *,
    refine_factor: int | None = None,
    model: KMActionModel | None = None,
) -> RegretCertificate:
    mesh = settings.km_mesh if grid is None else grid.mesh
    if not mesh > 0:
        raise InvalidParameterError(f"mesh must be positive, got {mesh!r}")
    factor = settings.km_refine_factor if refine_factor is None else refine_factor
    model = model or KMActionModel(design, cp.q)

    with tracer.start_as_current_span("km.worst_case_regret") as span:
        t0 = time.perf_counter()
        span.set_attribute("design.K", design.K)
        span.set_attribute("design.n", design.n)
        span.set_attribute("km.mesh", mesh)

        coarse = uniform_grid(0.0, 1.0, mesh)
        best = _lattice_search(model, coarse)
        if factor > 1:
            refined = _lattice_search(model, _refined_grid(coarse, best, mesh, factor))
            if refined.value > best.value:
                best = refined

        point = _monotone_point(design, best)
        certificate = RegretCertificate(
            policy="km",
            value=best.value * cp.scale,
            witness=km_witness(design, point),
            grid_error_bound=mesh * cp.scale,
            point=point,
        )
        span.set_attribute("km.value", certificate.value)
        span.set_attribute("km.elapsed_ms", int((time.perf_counter() - t0) * 1000))
        logger.debug("km worst case %.6g at %s", certificate.value, point.chain())
        return certificate


DesignBuilder = Callable[[float, int], CensoringDesign | None]


def single_level_design(x: float, n: int) -> CensoringDesign:
    return CensoringDesign((x,), (n,))


def sample_complexity_km(
    x: float,
    q: float,
    target: float,
    n_cap: int,
    grid: GridSpec | None = None,
    *,
    design_builder: DesignBuilder = single_level_design,
    rtol: float | None = None,
) -> int | None:
    """Smallest n whose worst-case KM regret is at most `target`; None if no n <= n_cap works.

    A value within a relative `rtol` of the target counts as meeting it. Sizes for
    which `design_builder` returns None are skipped.
    """
    if not target > 0:
        raise InvalidParameterError(f"target must be positive, got {target!r}")
    if n_cap < 1:
        raise InvalidParameterError(f"n_cap must be at least 1, got {n_cap!r}")
    rtol = settings.sample_complexity_rtol if rtol is None else rtol
    if rtol < 0:
        raise InvalidParameterError(f"rtol must be nonnegative, got {rtol!r}")
    threshold = target * (1.0 + rtol)
    cp = CostParameters.normalized(q)
    with tracer.start_as_current_span("km.sample_complexity") as span:
        span.set_attribute("km.x", x)
        span.set_attribute("km.target", target)
        for n in range(1, n_cap + 1):
            design = design_builder(x, n)
            if design is None:
                continue
            if worst_case_regret_km(design, cp, grid).value <= threshold:
                span.set_attribute("km.n_star", n)
                return n
        logger.info("target %.6g unattainable at x=%.4g within n <= %d", target, x, n_cap)
        return None
