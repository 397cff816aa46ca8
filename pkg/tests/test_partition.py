import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from nhppfit.empirical import EmpiricalRate, build_empirical
from nhppfit.partition import (
    Partition,
    PartitionGrid,
    PartitionProblem,
    canonicalize,
    evaluate,
    from_cuts,
    starting_point,
    uniform_start,
)
from nhppfit.synth import TrueRate, generate

from conftest import make_dataset


def brute_E(p, ds, er):
    """Cell-by-cell squared error, written independently of the evaluator."""
    cpu = er.cells // p.grid.G
    terms = []
    for lo, hi in p.intervals:
        a, b = 24 * lo / p.grid.G, 24 * hi / p.grid.G
        k = sum(1 for week in ds.arrivals_by_week for t in week if a <= t < b)
        lam = k / ds.m / (b - a)
        terms += [(lam - float(c)) ** 2 for c in er.rates[lo * cpu:hi * cpu]]
    return math.fsum(terms)


def variance_E(p, er):
    cpu = er.cells // p.grid.G
    return sum(
        (hi - lo) * cpu * np.var(er.rates[lo * cpu:hi * cpu]) for lo, hi in p.intervals
    )


def test_grid_validation():
    with pytest.raises(ValueError):
        PartitionGrid(G=8, B=9)
    with pytest.raises(ValueError):
        PartitionGrid(G=8, B=1)
    with pytest.raises(ValueError):
        PartitionGrid(G=192, B=24, ell_units=1)  # 7.5 minute intervals
    assert PartitionGrid.from_hours(96, 24, 1.0).ell_units == 4
    with pytest.raises(ValueError):
        PartitionGrid.from_hours(24, 24, 0.5)


@pytest.mark.parametrize("raw, expected", [
    ([0, 10, 5, 24], (0, 5, 10, 24)),
    ([0, 5, 5, 24], (0, 5, 5, 24)),
    ([0, -3, 30, 24], (0, 0, 24, 24)),
])
def test_canonicalize(raw, expected):
    assert canonicalize(raw, PartitionGrid(G=24, B=3)).x == expected


def test_collapsed_pairs_drop_out():
    p = Partition((0, 5, 5, 24), PartitionGrid(G=24, B=3))
    assert p.intervals == [(0, 5), (5, 24)] and p.N == 2
    assert p.boundaries_hours == [0.0, 5.0, 24.0]


@pytest.mark.parametrize("x", [(0, 5, 24), (1, 5, 10, 24), (0, 10, 5, 24), (0, 5, 10, 23)])
def test_partition_rejects_bad_vectors(x):
    with pytest.raises(ValueError):
        Partition(x, PartitionGrid(G=24, B=3))


def test_from_cuts_pads_with_end():
    g = PartitionGrid(G=8, B=4)
    assert from_cuts([3, 6], g).x == (0, 3, 6, 8, 8)
    assert from_cuts([], g).x == (0, 8, 8, 8, 8)
    with pytest.raises(ValueError):
        from_cuts([1, 2, 3, 4], g)


@pytest.mark.parametrize("G", [24, 96])
def test_hourly_start(G):
    p = starting_point(PartitionGrid(G=G, B=24, ell_units=G // 24))
    assert p.N == 24
    assert p.boundaries_hours == [float(h) for h in range(25)]


def test_hourly_start_requires_b24():
    with pytest.raises(ValueError):
        starting_point(PartitionGrid(G=24, B=12))
    assert uniform_start(PartitionGrid(G=8, B=4)).x == (0, 2, 4, 6, 8)


def test_constant_empirical_rate_gives_zero_error():
    ds = make_dataset([[0.1 + 0.25 * i for i in range(96)]] * 2)
    er = build_empirical(ds)
    assert np.all(er.rates == 4.0)
    e = evaluate(starting_point(PartitionGrid()), ds, er, 1.0)
    assert e.E == 0.0 and e.S == 0.0 and e.f == 0.0
    assert e.rates == [4.0] * 24


def test_two_cell_example():
    # cells of 12 h with rates 2 and 4 per hour; one interval has rate 3 and E = 1 + 1
    week = [12 * (i + 0.5) / 24 for i in range(24)] + [12 + 12 * (i + 0.5) / 48 for i in range(48)]
    ds = make_dataset([week, week])
    er = build_empirical(ds, 2)
    assert er.rates.tolist() == [2.0, 4.0]
    grid = PartitionGrid(G=2, B=2)
    e = PartitionProblem(ds, er, 0.0, grid=grid).evaluate(from_cuts([], grid))
    assert e.rates == [3.0]
    assert e.E == 2.0


def test_single_interval_has_no_smoothness_term(toy_problem, toy_grid):
    e = toy_problem.evaluate(from_cuts([], toy_grid))
    assert e.partition.N == 1 and e.S == 0.0
    assert e.f == e.E


def test_smoothness_term_hand_computed(toy_problem, toy_grid):
    e = toy_problem.evaluate(from_cuts([2, 4, 6], toy_grid))
    r = e.rates
    assert e.S == pytest.approx(sum((b - a) ** 2 for a, b in zip(r, r[1:])), rel=1e-15)
    assert e.f == e.E + toy_problem.w * e.S


def test_interval_rate_is_mean_count_over_length(four_segment_ds, toy_problem, toy_grid):
    e = toy_problem.evaluate(from_cuts([3], toy_grid))
    iv = e.intervals[0]
    assert (iv.a, iv.b) == (0.0, 9.0)
    manual = sum(int(np.count_nonzero(w < 9.0)) for w in four_segment_ds.arrivals_by_week)
    assert iv.k == manual
    assert iv.rate == manual / four_segment_ds.m / 9.0


def cut_sets(G):
    return st.sets(st.integers(1, G - 1), max_size=G - 1)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(cut_sets(8))
def test_error_identities(toy_problem, toy_grid, cuts):
    p = from_cuts(cuts, toy_grid)
    e = toy_problem.evaluate(p)
    assert e.E == brute_E(p, toy_problem.ds, toy_problem.er)
    assert e.E == pytest.approx(variance_E(p, toy_problem.er), rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(cut_sets(24), st.randoms())
def test_collapsed_and_permuted_representations_agree(cuts, rnd):
    ds = generate(TrueRate.parse("0-8:2,8-20:9,20-24:4"), 4, seed=7)
    grid = PartitionGrid(G=24, B=24)
    prob = PartitionProblem(ds, build_empirical(ds), 2.5, grid=grid)
    base = prob.evaluate(from_cuts(cuts, grid))
    # duplicate some cuts and shuffle the interior before canonicalizing
    inner = sorted(cuts)
    extra = [rnd.choice(inner) if inner else 0 for _ in range(23 - len(inner))]
    raw = inner + extra
    rnd.shuffle(raw)
    alt = prob.evaluate(canonicalize([0, *raw, 24], grid))
    assert alt.partition.cuts == base.partition.cuts
    assert (alt.E, alt.S, alt.f, alt.feasible) == (base.E, base.S, base.f, base.feasible)


def test_evaluation_is_pure(toy_problem, toy_grid):
    p = from_cuts([2, 5], toy_grid)
    first = toy_problem.evaluate(p)
    toy_problem.evaluate(from_cuts([1, 3, 7], toy_grid))
    again = toy_problem.evaluate(p)
    assert (first.E, first.S, first.f, first.violation) == (again.E, again.S, again.f, again.violation)
    fresh = evaluate(p, toy_problem.ds, toy_problem.er, toy_problem.w, grid=toy_grid)
    assert fresh.f == first.f


def test_interval_boundaries_are_shared_exactly(toy_problem, toy_grid):
    e = toy_problem.evaluate(from_cuts([1, 2, 3, 4, 5, 6, 7], toy_grid))
    assert sum(iv.k for iv in e.intervals) == toy_problem.ds.total
    for a, b in zip(e.intervals, e.intervals[1:]):
        assert a.b == b.a


def test_untestable_interval_makes_partition_infeasible():
    ds = make_dataset([[1.0, 20.0], [2.0, 21.0]])
    grid = PartitionGrid(G=8, B=8)
    e = evaluate(from_cuts([3, 6], grid), ds, build_empirical(ds), 1.0, grid=grid)
    mid = e.intervals[1]
    assert mid.k == 0 and mid.untestable
    assert not e.feasible and e.n_untestable == 1
    assert e.total_violation >= 1.0


def test_feasibility_matches_tests(toy_problem, toy_grid):
    e = toy_problem.evaluate(from_cuts([2, 4, 6], toy_grid))
    expected = all(iv.ks.accepted and iv.dispersion.accepted for iv in e.intervals)
    assert e.feasible == expected


def test_pair_constraints_zero_for_collapsed(toy_grid, toy_problem):
    e = toy_problem.evaluate(Partition((0, 2, 2, 5, 8, 8, 8, 8, 8), toy_grid))
    assert e.pair_g.shape == (8,)
    assert e.pair_g[1] == 0.0 and all(e.pair_g[4:] == 0.0)
    assert e.pair_g[0] == e.intervals[0].g


def test_problem_guards(four_segment_ds):
    er = build_empirical(four_segment_ds)
    with pytest.raises(ValueError):
        PartitionProblem(four_segment_ds, er, -1.0)
    with pytest.raises(ValueError):
        PartitionProblem(make_dataset([[1.0]]), er, 1.0)
    with pytest.raises(ValueError):
        PartitionProblem(four_segment_ds, build_empirical(four_segment_ds, 24), 1.0, grid=PartitionGrid(G=48, B=24, ell_units=2))


def test_with_weight_shares_intervals(toy_problem, toy_grid):
    p = from_cuts([3, 5], toy_grid)
    heavy = toy_problem.with_weight(100.0)
    a, b = toy_problem.evaluate(p), heavy.evaluate(p)
    assert a.E == b.E and a.S == b.S
    assert b.f == b.E + 100.0 * b.S
    assert toy_problem.w == 1.0
