import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhppfit.empirical import EmpiricalRate, build_empirical, rate_mass
from nhppfit.ingest import count_in_interval
from nhppfit.synth import TrueRate, generate

from conftest import make_dataset


def test_mean_count_over_width():
    ds = make_dataset([[0.1], []])
    er = build_empirical(ds, 96)
    assert er.rates[0] == 2.0
    assert np.all(er.rates[1:] == 0)


def test_empty_dataset():
    er = build_empirical(make_dataset([[], [], []]))
    assert er.cells == 96 and np.all(er.rates == 0)


def test_single_week_concentration():
    ds = make_dataset([[5.0, 5.05, 5.1, 5.2]])
    er = build_empirical(ds)
    assert er.rates[20] == 4 / 0.25
    assert er.rates.sum() == 16.0


def test_grid_invariants():
    er = build_empirical(make_dataset([[1.0]]), 48)
    assert er.cells * er.cell_width == 24
    assert er.cell_starts()[1] == 0.5


@pytest.mark.parametrize("rates, a, b, expected", [
    ([4.0] * 96, 0.0, 6.0, 24.0),
    ([0.0] * 96, 0.0, 24.0, 0.0),
])
def test_rate_mass_examples(rates, a, b, expected):
    assert rate_mass(EmpiricalRate(np.array(rates)), a, b) == pytest.approx(expected, abs=1e-12)


def test_rate_mass_two_cells():
    er = EmpiricalRate(np.array([2.0, 4.0] + [0.0] * 94))
    assert rate_mass(er, 0.0, 0.5) == pytest.approx(1.5)


def test_rate_mass_misaligned():
    er = EmpiricalRate(np.ones(96))
    with pytest.raises(ValueError):
        rate_mass(er, 0.1, 1.0)


def test_negative_rates_rejected():
    with pytest.raises(ValueError):
        EmpiricalRate(np.array([1.0, -1.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8), st.integers(0, 95), st.integers(1, 96))
def test_aggregation_consistency(seed, m, lo, span):
    hi = min(96, lo + span)
    if hi <= lo:
        return
    ds = generate(TrueRate.parse("0-8:2,8-20:9,20-24:4"), m, seed=seed)
    er = build_empirical(ds)
    a, b = lo * 0.25, hi * 0.25
    pooled = count_in_interval(ds, a, b)[1]
    assert rate_mass(er, a, b) == pytest.approx(pooled / m, rel=1e-12, abs=1e-12)


def test_mass_conserves_daily_average():
    ds = generate(TrueRate.constant(5.0), 6, seed=9)
    er = build_empirical(ds)
    assert np.sum(er.rates * er.cell_width) == pytest.approx(ds.total / ds.m, rel=1e-12)


@pytest.mark.parametrize("coarse", [24, 48, 96])
def test_refinement_consistency(coarse):
    ds = generate(TrueRate.parse("0-12:3,12-24:7"), 5, seed=4)
    fine = build_empirical(ds, 2 * coarse).rates
    assert np.allclose(fine.reshape(-1, 2).mean(axis=1), build_empirical(ds, coarse).rates, rtol=0, atol=1e-12)
