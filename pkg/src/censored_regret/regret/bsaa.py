"""Exact worst-case regret of base-stock SAA (BSAA) under a censoring design.

For a design with breakpoints 0 = x_0 <= x_1 <= ... <= x_K <= x_{K+1} = 1 the
adversary's problem collapses to a choice of crossing piece i and two CDF levels
v in [0, q] (used on pieces k <= i) and w in [q, 1] (pieces k > i). For fixed i
the objective is separable, so each crossing costs two 1-D grid searches.
Crossing i = -1 puts every piece on w; it is what recovers the uncensored SAA
worst case when all samples sit at level 1.
"""
from __future__ import annotations

import logging
import time

import numpy as np
from numpy.typing import ArrayLike, NDArray

from censored_regret.bernstein import PsiSpec, bernstein_tail, psi_bsaa_array, psi_lipschitz_bound
from censored_regret.config import settings
from censored_regret.core import CensoringDesign, CostParameters, StepCDF, uniform_grid
from censored_regret.errors import InvalidParameterError
from censored_regret.regret.certificate import RegretCertificate
from censored_regret.regret.search import refine_max
from censored_regret.telemetry import get_tracer

logger = logging.getLogger(__name__)
tracer = get_tracer()


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"critical fractile must lie in (0, 1), got {q!r}")


def bsaa_action_cdf(design: CensoringDesign, q: float, k: int, Fz: float) -> float:
    """P(BSAA orders at most z) for z in [x_k, x_{k+1}) when F(z) = Fz."""
    _check_q(q)
    if not 0 <= k <= design.K:
        raise InvalidParameterError(f"piece index must lie in [0, {design.K}], got {k!r}")
    spec = PsiSpec(design.n, design.sigma[k], q)
    return bernstein_tail(spec.r, spec.m, Fz)


def psi_curves(design: CensoringDesign, q: float, t: ArrayLike) -> NDArray[np.float64]:
    """Psi_k(t) for every piece k = 0..K; shape (K + 1, len(t))."""
    _check_q(q)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.vstack([psi_bsaa_array(PsiSpec(design.n, s, q), t) for s in design.sigma])


def bsaa_objective(design: CensoringDesign, q: float, crossing: int, v: float, w: float) -> float:
    """Adversary objective for crossing piece `crossing` and levels (v, w)."""
    if not -1 <= crossing <= design.K:
        raise InvalidParameterError(f"crossing must lie in [-1, {design.K}], got {crossing!r}")
    lengths = np.asarray(design.lengths)
    at_v = psi_curves(design, q, [v])[:, 0] * lengths
    at_w = psi_curves(design, q, [w])[:, 0] * lengths
    return float(at_v[: crossing + 1].sum() + at_w[crossing + 1:].sum())


def _crossing_tables(weighted_v: NDArray, weighted_w: NDArray) -> tuple[NDArray, NDArray]:
    """Row i + 1 holds sum_{k<=i} over v and sum_{k>i} over w, for crossings i = -1..K."""
    zeros_v = np.zeros((1, weighted_v.shape[1]))
    zeros_w = np.zeros((1, weighted_w.shape[1]))
    head = np.vstack([zeros_v, np.cumsum(weighted_v, axis=0)])
    tail = np.vstack([np.flip(np.cumsum(np.flip(weighted_w, 0), axis=0), 0), zeros_w])
    return head, tail


def three_point_witness(design: CensoringDesign, crossing: int, v: float, w: float) -> StepCDF:
    """Mass v at 0, w - v at the right end of the crossing piece, 1 - w at 1."""
    split = design.breakpoints[crossing + 1]
    return StepCDF.from_atoms([0.0, split, 1.0], [v, w - v, 1.0 - w])


def worst_case_regret_bsaa(
    design: CensoringDesign,
    cp: CostParameters,
    tol: float | None = None,
    *,
    golden_iterations: int | None = None,
) -> RegretCertificate:
    tol = settings.bsaa_tol if tol is None else tol
    if not tol > 0:
        raise InvalidParameterError(f"tol must be positive, got {tol!r}")
    iterations = settings.golden_iterations if golden_iterations is None else golden_iterations
    q = cp.q

    with tracer.start_as_current_span("bsaa.worst_case_regret") as span:
        t0 = time.perf_counter()
        span.set_attribute("design.K", design.K)
        span.set_attribute("design.n", design.n)
        span.set_attribute("bsaa.tol", tol)

        mesh = tol / psi_lipschitz_bound(design.n)
        V = uniform_grid(0.0, q, mesh)
        W = uniform_grid(q, 1.0, mesh)
        lengths = np.asarray(design.lengths)
        head, tail = _crossing_tables(psi_curves(design, q, V) * lengths[:, None],
                                      psi_curves(design, q, W) * lengths[:, None])

        best: tuple[float, int, float, float] | None = None
        for row in range(design.K + 2):
            crossing = row - 1
            jv, jw = int(np.argmax(head[row])), int(np.argmax(tail[row]))

            def part_v(x: float, c: int = crossing) -> float:
                return float((psi_curves(design, q, [x])[: c + 1, 0] * lengths[: c + 1]).sum())

            def part_w(x: float, c: int = crossing) -> float:
                return float((psi_curves(design, q, [x])[c + 1:, 0] * lengths[c + 1:]).sum())

            v, val_v = float(V[jv]), float(head[row, jv])
            w, val_w = float(W[jw]), float(tail[row, jw])
            if crossing >= 0:
                v, val_v = refine_max(part_v, v, val_v, 0.0, q, mesh, iterations=iterations)
            if crossing < design.K:
                w, val_w = refine_max(part_w, w, val_w, q, 1.0, mesh, iterations=iterations)
            value = val_v + val_w
            if best is None or value > best[0]:
                best = (value, crossing, v, w)

        value, crossing, v, w = best
        realized_mesh = max(np.max(np.diff(V), initial=0.0), np.max(np.diff(W), initial=0.0))
        certificate = RegretCertificate(
            policy="bsaa",
            value=value * cp.scale,
            witness=three_point_witness(design, crossing, v, w),
            grid_error_bound=psi_lipschitz_bound(design.n) * float(realized_mesh) * cp.scale,
            piece_index=crossing,
            v_star=v,
            w_star=w,
        )
        span.set_attribute("bsaa.value", certificate.value)
        span.set_attribute("bsaa.crossing", crossing)
        span.set_attribute("bsaa.elapsed_ms", int((time.perf_counter() - t0) * 1000))
        logger.debug("bsaa worst case %.6g at crossing %d (v=%.6g, w=%.6g)", certificate.value, crossing, v, w)
        return certificate
