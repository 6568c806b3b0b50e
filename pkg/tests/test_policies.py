from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from censored_regret.core import CensoringDesign, SampleSet
from censored_regret.errors import InvalidParameterError
from censored_regret.literals import parse_samples
from censored_regret.policies import (
    bsaa_decide,
    bsaa_decide_batch,
    censor_batch,
    km_cdf,
    km_decide,
    km_decide_batch,
)

from conftest import designs

FRACTILES = st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.8, 0.9, 0.95])


@pytest.mark.parametrize(
    "literal,q,expected",
    [
        ("1|0.2u,0.5u,0.9u", 0.5, 0.5),
        ("0.7|0.7,0.7,0.7", 0.8, 0.7),
        ("1|0.1u,0.7u,0.7u,1u", 0.8, 1.0),
    ],
)
def test_bsaa_decide(literal, q, expected):
    assert bsaa_decide(parse_samples(literal), q) == expected


def test_bsaa_rejects_bad_fractile():
    with pytest.raises(InvalidParameterError):
        bsaa_decide(parse_samples("1|0.5u"), 1.0)


def test_km_cdf_single_censored_point():
    cdf = km_cdf(parse_samples("0.5|0.3u,0.5")).cdf
    assert cdf(0.3) == pytest.approx(0.5)
    assert cdf(0.5) == pytest.approx(0.5)
    assert cdf(0.99) == pytest.approx(0.5)
    assert cdf(1.0) == 1.0


def test_km_cdf_mass_after_censoring():
    cdf = km_cdf(parse_samples("0.5|0.2u,0.5;1|0.7u")).cdf
    assert cdf(0.2) == pytest.approx(1 / 3)
    assert cdf(0.5) == pytest.approx(1 / 3)
    assert cdf(0.7) == 1.0


def test_km_orders_uncensored_before_censored_ties():
    estimate = km_cdf(parse_samples("0.5|0.5,0.5u"))
    assert [o.uncensored for o in estimate.ordered] == [True, False]
    assert estimate.cdf(0.5) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "literal,q,expected",
    [("0.5|0.3u,0.5", 0.8, 1.0), ("0.5|0.2u,0.5;1|0.7u", 0.5, 0.7)],
)
def test_km_decide(literal, q, expected):
    assert km_decide(parse_samples(literal), q) == expected


@given(sales=st.lists(st.integers(0, 100), min_size=1, max_size=50))
def test_km_equals_ecdf_without_censoring(sales):
    values = [s / 100 for s in sales]
    samples = SampleSet.from_demands(CensoringDesign((1.0,), (len(values),)), values)
    cdf = km_cdf(samples).cdf
    for s in set(values):
        assert cdf(s) == sum(v <= s for v in values) / len(values)


@given(sales=st.lists(st.integers(0, 100), min_size=1, max_size=50), q=FRACTILES)
def test_km_equals_bsaa_without_censoring(sales, q):
    values = [s / 100 for s in sales]
    samples = SampleSet.from_demands(CensoringDesign((1.0,), (len(values),)), values)
    assert km_decide(samples, q) == bsaa_decide(samples, q)


@given(sales=st.lists(st.integers(0, 100), min_size=1, max_size=20))
def test_bsaa_monotone_in_fractile(sales):
    samples = SampleSet.from_demands(CensoringDesign((1.0,), (len(sales),)), [s / 100 for s in sales])
    actions = [bsaa_decide(samples, q) for q in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert actions == sorted(actions)


@given(design=designs(), data=st.data())
def test_km_cdf_is_a_distribution(design, data):
    demands = data.draw(st.lists(st.integers(0, 10), min_size=design.n, max_size=design.n))
    estimate = km_cdf(SampleSet.from_demands(design, [d / 10 for d in demands]))
    values = np.asarray(estimate.cdf.cdf_values)
    assert np.all(np.diff(values) >= 0.0)
    assert values[-1] == 1.0
    assert estimate.cdf.support[-1] == 1.0


@settings(max_examples=50)
@given(design=designs(), data=st.data(), q=FRACTILES)
def test_batch_policies_match_scalar(design, data, q):
    rows = data.draw(
        st.lists(
            st.lists(st.integers(0, 10), min_size=design.n, max_size=design.n),
            min_size=1,
            max_size=5,
        )
    )
    demands = np.asarray(rows, dtype=float) / 10
    bsaa = bsaa_decide_batch(design, demands, q)
    km = km_decide_batch(design, demands, q)
    for row, b, k in zip(demands, bsaa, km):
        samples = SampleSet.from_demands(design, row.tolist())
        assert b == bsaa_decide(samples, q)
        assert k == km_decide(samples, q)


def test_censor_batch():
    design = CensoringDesign((0.5, 1.0), (1, 1))
    sales, uncensored = censor_batch(design, [[0.7, 0.7], [0.5, 0.2]])
    assert sales.tolist() == [[0.5, 0.7], [0.5, 0.2]]
    assert uncensored.tolist() == [[False, True], [True, True]]
