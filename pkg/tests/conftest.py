from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from censored_regret.core import CensoringDesign, CostParameters, StepCDF
from censored_regret.policies import km_decide_batch


@pytest.fixture
def cp08() -> CostParameters:
    return CostParameters.normalized(0.8)


@pytest.fixture
def cp05() -> CostParameters:
    return CostParameters.normalized(0.5)


@st.composite
def step_cdfs(draw, max_atoms: int = 5, resolution: int = 20) -> StepCDF:
    """Distributions on a 1/resolution grid of [0, 1] with integer-weighted atoms."""
    atoms = draw(
        st.lists(
            st.tuples(st.integers(0, resolution), st.integers(1, 10)),
            min_size=1,
            max_size=max_atoms,
            unique_by=lambda a: a[0],
        )
    )
    total = sum(w for _, w in atoms)
    return StepCDF.from_atoms([p / resolution for p, _ in atoms], [w / total for _, w in atoms])


@st.composite
def designs(draw, max_levels: int = 3, max_count: int = 3) -> CensoringDesign:
    levels = sorted(draw(st.lists(st.integers(0, 10), min_size=1, max_size=max_levels)))
    counts = draw(st.lists(st.integers(1, max_count), min_size=len(levels), max_size=len(levels)))
    return CensoringDesign(tuple(x / 10 for x in levels), tuple(counts))


def enumerate_km_cdf(design: CensoringDesign, F: StepCDF, q: float, z: float) -> float:
    """P(KM orders at most z) by brute force over every demand tuple."""
    support = np.asarray(F.support)
    probs = F.probabilities
    total = 0.0
    for idx in itertools.product(range(support.size), repeat=design.n):
        idx = list(idx)
        action = km_decide_batch(design, support[idx][None, :], q)[0]
        if action <= z:
            total += float(np.prod(probs[idx]))
    return total
