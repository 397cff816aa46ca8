import numpy as np
import pytest

from nhppfit.ingest import count_in_interval, load_arrivals
from nhppfit.stattests import dispersion_test
from nhppfit.synth import OverdispersionSpec, TrueRate, expected_counts, generate, write_csv


def test_true_rate_validation():
    with pytest.raises(ValueError):
        TrueRate(((0.0, 12.0, 1.0), (13.0, 24.0, 1.0)))
    with pytest.raises(ValueError):
        TrueRate(((0.0, 12.0, -1.0), (12.0, 24.0, 1.0)))
    with pytest.raises(ValueError):
        TrueRate(((1.0, 24.0, 1.0),))


def test_parse_and_breakpoints():
    rate = TrueRate.parse("0-7:4,7-11:12,11-18:8,18-24:5")
    assert rate.breakpoints == [7.0, 11.0, 18.0]
    assert rate.rate_at(np.array([0.0, 7.0, 10.99, 23.5])).tolist() == [4, 12, 12, 5]


@pytest.mark.parametrize("a, b, expected", [(0.0, 6.0, 24.0), (10.0, 14.0, 2 * 2 + 2 * 6), (0.0, 24.0, 96.0)])
def test_expected_counts(a, b, expected):
    rate = TrueRate.constant(4.0) if expected == 24.0 else TrueRate.parse("0-12:2,12-24:6")
    assert expected_counts(rate, a, b) == pytest.approx(expected)


def test_zero_rate_gives_empty_weeks():
    ds = generate(TrueRate.constant(0.0), 3, seed=1)
    assert ds.m == 3 and ds.total == 0


def test_deterministic_given_seed():
    rate = TrueRate.parse("0-12:2,12-24:6")
    assert generate(rate, 4, seed=11) == generate(rate, 4, seed=11)
    assert generate(rate, 4, seed=11) != generate(rate, 4, seed=12)


def test_constant_rate_counts_are_poisson():
    counts = [generate(TrueRate.constant(2.0), 1, seed=s).total for s in range(400)]
    mean, var = np.mean(counts), np.var(counts, ddof=1)
    se = np.sqrt(48 / 400)
    assert abs(mean - 48) < 3 * se
    # variance of the sample variance of a Poisson(48) sample is about 2*48^2/(n-1)
    assert abs(var - 48) < 3 * np.sqrt(2 * 48**2 / 399)


def test_two_segment_means():
    ds = generate(TrueRate.parse("0-12:2,12-24:6"), 200, seed=2024)
    for (a, b), mu in [((0.0, 12.0), 24.0), ((12.0, 24.0), 72.0)]:
        counts = np.array(count_in_interval(ds, a, b)[0])
        se = np.sqrt(mu / ds.m)
        assert abs(counts.mean() - mu) < 3 * se
        assert abs(counts.var(ddof=1) - mu) < 3 * np.sqrt(2 * mu**2 / (ds.m - 1))


def test_dispersion_size_with_identity_scales():
    rate = TrueRate.parse("0-12:2,12-24:6")
    accepted = sum(
        dispersion_test(count_in_interval(generate(rate, 13, OverdispersionSpec.identity(13), seed=s), 12.0, 15.0)[0]).accepted
        for s in range(400)
    )
    assert abs(accepted / 400 - 0.95) < 3 * np.sqrt(0.05 * 0.95 / 400)


def test_overdispersion_week_scales():
    od = OverdispersionSpec.alternating(5, [1.0, 3.0])
    assert od.week_scale == (1.0, 3.0, 1.0, 3.0, 1.0)
    with pytest.raises(ValueError):
        OverdispersionSpec((1.0, 0.0))
    with pytest.raises(ValueError):
        generate(TrueRate.constant(1.0), 3, od, seed=1)


def test_csv_round_trip(tmp_path):
    ds = generate(TrueRate.parse("0-12:20,12-24:60"), 3, seed=8)
    path = tmp_path / "s.csv"
    write_csv(ds, path)
    back = load_arrivals(path, "tue", 3)
    assert [w.size for w in back.arrivals_by_week] == [w.size for w in ds.arrivals_by_week]
    for orig, loaded in zip(ds.arrivals_by_week, back.arrivals_by_week):
        assert np.max(np.abs(np.sort(orig) - loaded)) < 60 / 3600
