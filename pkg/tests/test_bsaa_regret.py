from __future__ import annotations

import numpy as np
import pytest

from censored_regret.bernstein import bernstein_tail
from censored_regret.core import CensoringDesign, CostParameters
from censored_regret.errors import InvalidParameterError
from censored_regret.literals import parse_design
from censored_regret.oracle import exact_expected_regret, mc_expected_regret
from censored_regret.regret.bsaa import (
    bsaa_action_cdf,
    bsaa_objective,
    psi_curves,
    three_point_witness,
    worst_case_regret_bsaa,
)

SMALL_DESIGNS = ["1.0:2", "0.5:1,1.0:1", "0.3:2,0.8:1", "0.2:1,0.6:1,0.9:1", "0:1,1:2"]


class TestActionCdf:
    def test_past_the_rank_always_below(self):
        design = CensoringDesign((0.2, 0.4, 1.0), (3, 1, 1))
        assert bsaa_action_cdf(design, 0.5, 1, 0.0) == 1.0
        assert bsaa_action_cdf(design, 0.5, 2, 0.4) == 1.0

    def test_uncensored_piece_zero(self):
        design = CensoringDesign((1.0,), (7,))
        assert bsaa_action_cdf(design, 0.8, 0, 0.6) == pytest.approx(bernstein_tail(6, 7, 0.6))

    def test_rank_zero_convention(self):
        assert bsaa_action_cdf(parse_design("0.5:1,1:1"), 0.5, 1, 0.5) == 1.0

    def test_rejects_piece_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            bsaa_action_cdf(parse_design("0.5:1,1:1"), 0.5, 3, 0.5)


def test_psi_curves_shape():
    design = parse_design("0.2:1,0.4:1,0.6:1,0.8:1,1:15")
    assert psi_curves(design, 0.9, np.linspace(0.0, 1.0, 11)).shape == (6, 11)


def test_psi_curve_modes_move_left_with_the_piece():
    design = parse_design("0.2:1,0.4:1,0.6:1,0.8:1,1:15")
    q = 0.9
    v = np.linspace(0.0, q, 3001)
    modes = v[np.argmax(psi_curves(design, q, v), axis=1)]
    assert np.all(np.diff(modes) <= 1e-12)


def test_single_uncensored_sample(cp05):
    cert = worst_case_regret_bsaa(parse_design("1.0:1"), cp05, 1e-5)
    assert cert.value == pytest.approx(0.0625, abs=1e-5)
    assert cert.value <= 0.0625 + 1e-12


def test_all_samples_at_zero_leave_the_full_underage():
    q = 0.7
    cert = worst_case_regret_bsaa(parse_design("0:1"), CostParameters.normalized(q), 1e-4)
    assert cert.value == pytest.approx(q, abs=1e-4)
    assert cert.witness.support == (1.0,)


def test_uncensored_design_reduces_to_psi0(cp08):
    n = 6
    design = CensoringDesign((1.0,), (n,))
    t = np.linspace(0.0, 1.0, 200_001)
    psi0 = psi_curves(design, 0.8, t)[0]
    expected = max(psi0[t <= 0.8].max(), psi0[t >= 0.8].max())
    cert = worst_case_regret_bsaa(design, cp08, 1e-4)
    assert cert.value == pytest.approx(expected, abs=1e-4)


def test_scaling_by_cost_sum():
    design = parse_design("0.6:2,1:1")
    base = worst_case_regret_bsaa(design, CostParameters.normalized(0.75), 1e-4)
    scaled = worst_case_regret_bsaa(design, CostParameters(3.0, 1.0), 1e-4)
    assert scaled.value == pytest.approx(4.0 * base.value, rel=1e-9)


def test_objective_reproduces_certificate(cp08):
    design = parse_design("0.3:2,0.8:1")
    cert = worst_case_regret_bsaa(design, cp08, 1e-4)
    again = bsaa_objective(design, 0.8, cert.piece_index, cert.v_star, cert.w_star)
    assert again == pytest.approx(cert.value, abs=1e-12)


def test_rejects_nonpositive_tol(cp08):
    with pytest.raises(InvalidParameterError):
        worst_case_regret_bsaa(parse_design("1:1"), cp08, 0.0)


@pytest.mark.parametrize("literal", SMALL_DESIGNS)
@pytest.mark.parametrize("q", [0.5, 0.8])
def test_witness_attains_certificate(literal, q):
    design = parse_design(literal)
    cp = CostParameters.normalized(q)
    cert = worst_case_regret_bsaa(design, cp, 1e-4)
    exact = exact_expected_regret("bsaa", design, cert.witness, cp).mean
    assert exact == pytest.approx(cert.value, abs=1e-9)


@pytest.mark.parametrize("literal", SMALL_DESIGNS)
def test_no_three_point_adversary_beats_certificate(literal):
    q, tol = 0.8, 1e-4
    design = parse_design(literal)
    cp = CostParameters.normalized(q)
    cert = worst_case_regret_bsaa(design, cp, tol)
    levels = np.linspace(0.0, 1.0, 11)
    for crossing in range(-1, design.K + 1):
        for v in levels:
            for w in levels[levels >= v]:
                F = three_point_witness(design, crossing, float(v), float(w))
                assert exact_expected_regret("bsaa", design, F, cp).mean <= cert.value + tol


def test_grouped_design_matches_unit_count_expansion(cp08):
    design = parse_design("0.5:3,1:2")
    grouped = worst_case_regret_bsaa(design, cp08, 1e-4)
    expanded = worst_case_regret_bsaa(design.unit_count_expansion(), cp08, 1e-4)
    assert grouped.value == pytest.approx(expanded.value, abs=2e-4)


def test_grid_error_bound_is_reported(cp08):
    cert = worst_case_regret_bsaa(parse_design("0.7:9,1:1"), cp08, 1e-3)
    assert 0.0 < cert.grid_error_bound <= 1e-3 + 1e-12


@pytest.mark.slow
def test_bsaa_regret_grows_with_n():
    cp = CostParameters.normalized(0.8)
    values = [worst_case_regret_bsaa(parse_design(f"0.7:{n - 1},1:1"), cp, 1e-4).value for n in (20, 40, 60, 80, 100)]
    assert all(b >= a - 1e-4 for a, b in zip(values, values[1:]))


@pytest.mark.slow
def test_bsaa_level_is_shared_across_exploration_counts():
    cp = CostParameters.normalized(0.8)
    values = []
    for m in (0, 1, 2, 5, 10):
        literal = f"0.7:{100 - m},1:{m}" if m else "0.7:100"
        values.append(worst_case_regret_bsaa(parse_design(literal), cp, 1e-4).value)
    assert max(values) <= 1.1 * min(values)


@pytest.mark.slow
@pytest.mark.parametrize("literal", ["0.7:90,1:10", "0.7:99,1:1"])
def test_witness_holds_up_under_simulation(literal):
    cp = CostParameters.normalized(0.8)
    design = parse_design(literal)
    cert = worst_case_regret_bsaa(design, cp, 1e-4)
    estimate = mc_expected_regret("bsaa", design, cert.witness, cp, 100_000, seed=5)
    assert estimate.mean == pytest.approx(cert.value, abs=4 * estimate.std_error + 1e-3)
