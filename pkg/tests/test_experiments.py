from __future__ import annotations

import pytest

from censored_regret.errors import InvalidParameterError
from censored_regret.experiments import (
    SweepConfig,
    psi_table,
    read_csv,
    sample_complexity_header,
    sample_complexity_table,
    sample_complexity_target,
    sweep_design,
    sweep_header,
    sweep_regret,
    sweep_tasks,
    write_csv,
    x_grid,
)
from censored_regret.literals import parse_design
from censored_regret.policies import Policy


def test_sweep_design():
    assert sweep_design(5, 6, 0.7) is None
    only_x = sweep_design(5, 0, 0.7)
    assert (only_x.levels, only_x.counts) == ((0.7,), (5,))
    mixed = sweep_design(5, 2, 0.7)
    assert (mixed.levels, mixed.counts) == ((0.7, 1.0), (3, 2))
    only_one = sweep_design(5, 5, 0.7)
    assert (only_one.levels, only_one.counts) == ((1.0,), (5,))


def test_sweep_header():
    config = SweepConfig(policy="km", xs=(0.7, 0.8), q=0.8, m_values=(0, 1))
    assert config.policy is Policy.KM
    assert sweep_header(config) == [
        "n",
        "wc_regret_0_0.7",
        "wc_regret_1_0.7",
        "wc_regret_full_info_0.7",
        "wc_regret_0_0.8",
        "wc_regret_1_0.8",
        "wc_regret_full_info_0.8",
    ]
    assert len(sweep_tasks(config)) == 100 * 6


@pytest.mark.parametrize(
    "kwargs",
    [
        {"xs": ()},
        {"xs": (1.2,)},
        {"xs": (0.7,), "q": 1.0},
        {"xs": (0.7,), "n_values": (0,)},
        {"xs": (0.7,), "m_values": (-1,)},
    ],
)
def test_sweep_config_validation(kwargs):
    kwargs.setdefault("q", 0.8)
    with pytest.raises(InvalidParameterError):
        SweepConfig(policy="bsaa", **kwargs)


def test_small_bsaa_sweep():
    config = SweepConfig(policy="bsaa", xs=(0.7,), q=0.8, m_values=(0, 1, 5), n_values=(1, 2, 3), tol=1e-3)
    header, rows = sweep_regret(config)
    assert header == ["n", "wc_regret_0_0.7", "wc_regret_1_0.7", "wc_regret_5_0.7", "wc_regret_full_info_0.7"]
    assert [row[0] for row in rows] == [1, 2, 3]
    assert all(row[3] is None for row in rows)
    # one sample at level 1 is the full-information design
    assert rows[0][2] == rows[0][4]
    # a censored sample can only hurt
    assert all(row[1] >= row[4] - 1e-3 for row in rows)


def test_single_row_km_sweep():
    config = SweepConfig(policy="km", xs=(0.8,), q=0.8, m_values=(1,), n_values=(5,), km_mesh=1.0 / 50.0,
                         full_info=False)
    header, rows = sweep_regret(config)
    assert header == ["n", "wc_regret_1_0.8"]
    assert len(rows) == 1 and rows[0][0] == 5 and rows[0][1] > 0.0


def test_csv_round_trip_is_byte_stable(tmp_path):
    header = ["n", "a", "b"]
    rows = [[1, 0.1, None], [2, 1.0 / 3.0, 2.5e-17]]
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    write_csv(first, header, rows)
    read_header, read_rows = read_csv(first)
    assert read_header == header
    assert read_rows[1][1] == 1.0 / 3.0
    assert read_rows[0][2] is None
    write_csv(second, read_header, read_rows)
    assert first.read_bytes() == second.read_bytes()
    assert b"\r\n" not in first.read_bytes()
    assert first.read_text().splitlines()[1] == "1,0.10000000000000001,"


def test_sample_complexity_headers():
    assert sample_complexity_header(0.9, 0.25) == ["x", "num_sample_0.0225"]
    assert sample_complexity_header(0.8, 0.25) == ["x", "num_sample_0.04"]
    assert sample_complexity_target(0.8, 0.25) == pytest.approx(0.04)
    assert sample_complexity_target(0.9, 0.9999) == pytest.approx(0.9999 * 0.09)
    with pytest.raises(InvalidParameterError):
        sample_complexity_target(0.9, 1.0)
    with pytest.raises(InvalidParameterError):
        sample_complexity_target(0.9, 0.0)


def test_sample_complexity_table():
    header, rows = sample_complexity_table(0.5, 0.5, [1.0], n_cap=3, mesh=1.0 / 50.0)
    assert header == ["x", "num_sample_0.125"]
    assert rows == [[1.0, 1]]


def test_sample_complexity_table_counts_exploration_in_n():
    _, rows = sample_complexity_table(0.5, 0.5, [0.0], n_cap=4, mesh=1.0 / 50.0, m=2)
    assert rows == [[0.0, 2]]
    _, rows = sample_complexity_table(0.5, 0.5, [0.0], n_cap=4, mesh=1.0 / 50.0, m=5)
    assert rows == [[0.0, None]]


def test_x_grid():
    xs = x_grid(0.70, 0.95, 0.01)
    assert len(xs) == 26
    assert xs[0] == 0.7 and xs[-1] == 0.95 and xs[10] == 0.8
    with pytest.raises(InvalidParameterError):
        x_grid(0.9, 0.8, 0.01)


def test_psi_table():
    header, rows = psi_table(parse_design("0.5:1,1:1"), 0.5, 11)
    assert header == ["t", "psi0", "psi1", "psi2"]
    assert len(rows) == 11
    assert rows[0][0] == 0.0 and rows[-1][0] == 1.0
    assert rows[0][1] == pytest.approx(0.0, abs=1e-15)
    assert rows[0][2] == pytest.approx(0.5)
    with pytest.raises(InvalidParameterError):
        psi_table(parse_design("1:1"), 0.5, 1)
