"""Independent evaluation of E[regret] for a fixed demand distribution.

`exact_expected_regret` enumerates every demand tuple, `mc_expected_regret`
replays the sampling pipeline with a counter-based generator, and
`expected_regret_integral` evaluates the integral form of the regret with the
analytic action distributions. Agreement of the three is what the worst-case
engines are tested against.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from censored_regret.config import settings
from censored_regret.core import CensoringDesign, CostParameters, StepCDF, regrets
from censored_regret.errors import CapacityError, InvalidParameterError
from censored_regret.policies import BATCH_POLICIES, Policy
from censored_regret.regret.bsaa import bsaa_action_cdf
from censored_regret.regret.km import KMActionModel
from censored_regret.telemetry import get_tracer

logger = logging.getLogger(__name__)
tracer = get_tracer()

_EXACT_CHUNK = 65_536


class OracleMode(StrEnum):
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class OracleEstimate:
    mean: float
    std_error: float
    mode: OracleMode
    trials: int


def _atoms(F: StepCDF) -> tuple[np.ndarray, np.ndarray]:
    probs = F.probabilities
    keep = probs > 0
    return np.asarray(F.support)[keep], probs[keep]


def exact_expected_regret(
    policy: Policy | str,
    design: CensoringDesign,
    F: StepCDF,
    cp: CostParameters,
    *,
    capacity: int | None = None,
) -> OracleEstimate:
    """Average regret over all s**n demand tuples, in lexicographic order of support indices."""
    decide = BATCH_POLICIES[Policy(policy)]
    capacity = settings.oracle_exact_cap if capacity is None else capacity
    support, probs = _atoms(F)
    s, n = support.size, design.n
    if n * math.log(s) > math.log(capacity) + 1e-12:
        raise CapacityError(f"exact enumeration needs {s}**{n} tuples (cap {capacity}); use --mode mc")
    total = s**n

    with tracer.start_as_current_span("oracle.exact") as span:
        span.set_attribute("oracle.tuples", total)
        powers = s ** np.arange(n - 1, -1, -1, dtype=np.int64)
        partials = []
        for start in range(0, total, _EXACT_CHUNK):
            idx = np.arange(start, min(total, start + _EXACT_CHUNK), dtype=np.int64)
            digits = (idx[:, None] // powers) % s
            weights = np.prod(probs[digits], axis=1)
            actions = decide(design, support[digits], cp.q)
            partials.append(float(np.dot(weights, regrets(actions, F, cp))))
        mean = math.fsum(partials)
    return OracleEstimate(mean=mean, std_error=0.0, mode=OracleMode.EXACT, trials=total)


def mc_expected_regret(
    policy: Policy | str,
    design: CensoringDesign,
    F: StepCDF,
    cp: CostParameters,
    trials: int,
    seed: int,
    *,
    block_size: int | None = None,
) -> OracleEstimate:
    """Seeded Monte-Carlo estimate.

    Replays are grouped in blocks; block b draws from Philox keyed by (seed, b), so
    the output depends only on (seed, trials, block size) and not on how blocks
    are scheduled.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials!r}")
    if seed < 0:
        raise InvalidParameterError(f"seed must be nonnegative, got {seed!r}")
    decide = BATCH_POLICIES[Policy(policy)]
    block = settings.mc_block_size if block_size is None else block_size
    support, probs = _atoms(F)

    with tracer.start_as_current_span("oracle.mc") as span:
        span.set_attribute("oracle.trials", trials)
        span.set_attribute("oracle.seed", seed)
        chunks = []
        for b, start in enumerate(range(0, trials, block)):
            size = min(block, trials - start)
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(b,))))
            idx = rng.choice(support.size, size=(size, design.n), p=probs)
            chunks.append(regrets(decide(design, support[idx], cp.q), F, cp))
        values = np.concatenate(chunks)
        mean = float(np.mean(values))
        if trials == 1 or np.ptp(values) == 0.0:
            std_error = 0.0
        else:
            std_error = float(np.std(values, ddof=1) / math.sqrt(trials))
    logger.debug("mc %s: mean %.6g +- %.2g over %d trials", policy, mean, std_error, trials)
    return OracleEstimate(mean=mean, std_error=std_error, mode=OracleMode.MONTE_CARLO, trials=trials)


def expected_regret_integral(
    policy: Policy | str,
    design: CensoringDesign,
    F: StepCDF,
    cp: CostParameters,
    *,
    model: KMActionModel | None = None,
) -> float:
    """(c_u + c_o) * integral over [0, 1] of (1 - P(pi <= z))(F(z) - q) + (q - F(z))^+.

    The integrand is constant between consecutive support points and design
    levels, so the integral is a finite sum.
    """
    policy = Policy(policy)
    q = cp.q
    if policy is Policy.KM and model is None:
        model = KMActionModel(design, q)
    cuts = sorted({0.0, 1.0, *F.support, *design.levels})
    terms = []
    for a, b in zip(cuts, cuts[1:]):
        if b <= a:
            continue
        k = sum(1 for x in design.levels if x <= a)
        Fz = F(a)
        if policy is Policy.BSAA:
            p = bsaa_action_cdf(design, q, k, Fz)
        else:
            prefix = [F(x) for x in design.levels[:k]]
            p = float(model.action_cdf(k, prefix, Fz)[0])
        terms.append((b - a) * ((1.0 - p) * (Fz - q) + max(q - Fz, 0.0)))
    return cp.scale * math.fsum(terms)
