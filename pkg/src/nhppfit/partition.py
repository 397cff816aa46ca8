"""Candidate day partitions, their interval rates, constraints and objective.

A partition is a vector ``x`` of ``B + 1`` integers on a grid of ``G`` units
per day with ``x[0] = 0`` and ``x[B] = G``. Consecutive equal entries are
collapsed pairs and contribute no interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .empirical import EmpiricalRate, grid_edges
from .ingest import HOURS_PER_DAY, ArrivalDataset
from .stattests import (
    DispersionResult,
    KsResult,
    TestConfig,
    dispersion_test,
    ks_from_taus,
)


@dataclass(frozen=True)
class PartitionGrid:
    """Integer grid for boundaries.

    Attributes:
        G: grid units per day (24 gives hourly boundaries).
        B: maximum number of intervals; ``x`` has ``B + 1`` entries.
        ell_units: minimum length of a non-collapsed interval, in units.
    """

    G: int = 24
    B: int = 24
    ell_units: int = 1

    def __post_init__(self) -> None:
        if not self.G >= self.B >= 2:
            raise ValueError(f"need G >= B >= 2, got G={self.G}, B={self.B}")
        min_ell = max(1, math.ceil(self.G / 96))
        if self.ell_units < min_ell:
            raise ValueError(
                f"ell_units={self.ell_units} is below {min_ell} unit(s), i.e. shorter than 15 minutes"
            )

    @property
    def unit_hours(self) -> float:
        return HOURS_PER_DAY / self.G

    @property
    def ell_hours(self) -> float:
        return self.ell_units * self.unit_hours

    @classmethod
    def from_hours(cls, G: int = 24, B: int = 24, ell_hours: float = 1.0) -> "PartitionGrid":
        units = ell_hours * G / HOURS_PER_DAY
        ell_units = int(round(units))
        if abs(units - ell_units) > 1e-9:
            raise ValueError(f"ell={ell_hours} h is not a whole number of {HOURS_PER_DAY / G} h units")
        return cls(G=G, B=B, ell_units=ell_units)


@dataclass(frozen=True)
class Partition:
    x: tuple[int, ...]
    grid: PartitionGrid

    def __post_init__(self) -> None:
        x = tuple(int(v) for v in self.x)
        g = self.grid
        if len(x) != g.B + 1:
            raise ValueError(f"x must have {g.B + 1} entries, got {len(x)}")
        if x[0] != 0 or x[-1] != g.G:
            raise ValueError(f"x must start at 0 and end at {g.G}")
        if any(b < a for a, b in zip(x, x[1:])):
            raise ValueError("x must be non-decreasing")
        object.__setattr__(self, "x", x)

    @property
    def intervals(self) -> list[tuple[int, int]]:
        """Non-collapsed (lo, hi) pairs in grid units."""
        return [(a, b) for a, b in zip(self.x, self.x[1:]) if b > a]

    @property
    def N(self) -> int:
        return len(self.intervals)

    @property
    def cuts(self) -> tuple[int, ...]:
        """Distinct boundary points, including 0 and G."""
        return tuple(sorted(set(self.x)))

    @property
    def boundaries_hours(self) -> list[float]:
        edges = grid_edges(self.grid.G)
        return [float(edges[c]) for c in self.cuts]


def canonicalize(raw: Sequence[int], grid: PartitionGrid) -> Partition:
    """Clamp the endpoints and sort the interior entries."""
    vals = [min(max(int(v), 0), grid.G) for v in raw]
    if len(vals) != grid.B + 1:
        raise ValueError(f"expected {grid.B + 1} entries, got {len(vals)}")
    interior = sorted(vals[1:-1])
    return Partition((0, *interior, grid.G), grid)


def from_cuts(cuts: Iterable[int], grid: PartitionGrid) -> Partition:
    """Partition whose boundaries are ``cuts``; unused slots collapse onto G."""
    inner = sorted({int(c) for c in cuts} - {0, grid.G})
    if len(inner) > grid.B - 1:
        raise ValueError(f"{len(inner) + 1} intervals exceed B={grid.B}")
    if inner and (inner[0] < 0 or inner[-1] > grid.G):
        raise ValueError("cuts must lie on the grid")
    pad = [grid.G] * (grid.B - 1 - len(inner))
    return Partition((0, *inner, *pad, grid.G), grid)


def starting_point(grid: PartitionGrid) -> Partition:
    """The hourly partition: 24 intervals of one hour."""
    if grid.B != 24 or grid.G % 24:
        raise ValueError("the hourly start needs B = 24 and G divisible by 24")
    step = grid.G // 24
    return Partition(tuple(i * step for i in range(25)), grid)


def uniform_start(grid: PartitionGrid) -> Partition:
    """Near-uniform split into ``B`` intervals; equals the hourly start when B=24."""
    if grid.B == 24 and grid.G % 24 == 0:
        return starting_point(grid)
    return Partition(tuple(i * grid.G // grid.B for i in range(grid.B + 1)), grid)


@dataclass(frozen=True)
class IntervalEval:
    lo: int
    hi: int
    a: float
    b: float
    counts: tuple[int, ...]
    k: int
    mu: float
    rate: float
    ks: KsResult
    dispersion: DispersionResult
    g: float  # NaN when untestable
    h: float
    length_shortfall: float  # hours below the minimum length, 0 when long enough
    fit_terms: np.ndarray = field(repr=False, compare=False)

    @property
    def untestable(self) -> bool:
        return self.ks.untestable or self.dispersion.untestable

    @property
    def violation(self) -> float:
        """Summed constraint violation used by the penalty."""
        v = self.length_shortfall
        if self.untestable:
            return v + 1.0
        return v + max(0.0, self.g) + max(0.0, self.h)

    @property
    def max_violation(self) -> float:
        if self.untestable:
            return max(1.0, self.length_shortfall)
        return max(0.0, self.g, self.h, self.length_shortfall)

    @property
    def fit_error(self) -> float:
        return math.fsum(self.fit_terms)

    @property
    def label(self) -> str:
        return f"{_clock(self.a)} – {_clock(self.b)}"


def _clock(hours: float) -> str:
    minutes = int(round(hours * 60))
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


@dataclass(frozen=True)
class EvalResult:
    partition: Partition
    intervals: tuple[IntervalEval, ...]
    w: float
    E: float
    S: float
    f: float
    violation: float  # max over intervals of the largest violated amount
    total_violation: float
    feasible: bool

    @property
    def x(self) -> tuple[int, ...]:
        return self.partition.x

    @property
    def rates(self) -> list[float]:
        return [iv.rate for iv in self.intervals]

    @property
    def n_untestable(self) -> int:
        return sum(iv.untestable for iv in self.intervals)

    def _pair_values(self, attr: str) -> np.ndarray:
        by_lo = {iv.lo: getattr(iv, attr) for iv in self.intervals}
        x = self.partition.x
        return np.array([by_lo[a] if b > a else 0.0 for a, b in zip(x, x[1:])])

    @property
    def pair_g(self) -> np.ndarray:
        """KS constraint value per consecutive pair of ``x`` (0 when collapsed)."""
        return self._pair_values("g")

    @property
    def pair_h(self) -> np.ndarray:
        return self._pair_values("h")

    def to_json_dict(self) -> dict:
        return {
            "boundaries_hours": self.partition.boundaries_hours,
            "rates_per_hour": self.rates,
            "feasible": self.feasible,
            "E": self.E,
            "S": self.S,
            "f": self.f,
        }


class PartitionProblem:
    """Evaluator for one dataset, empirical model and weight.

    Interval statistics are cached by (lo, hi), so evaluating many
    partitions that share intervals is cheap.
    """

    def __init__(
        self,
        ds: ArrivalDataset,
        er: EmpiricalRate,
        w: float,
        cfg: TestConfig = TestConfig(),
        grid: PartitionGrid = PartitionGrid(),
    ):
        if w < 0:
            raise ValueError("w must be non-negative")
        if ds.m < 2:
            raise ValueError("at least two weeks are needed for the dispersion test")
        if er.cells % grid.G:
            raise ValueError(f"empirical cells ({er.cells}) must be a multiple of G ({grid.G})")
        self.ds = ds
        self.er = er
        self.w = float(w)
        self.cfg = cfg
        self.grid = grid
        self.cells_per_unit = er.cells // grid.G
        self.edges = grid_edges(grid.G)
        self._week_cum = np.stack(
            [np.searchsorted(week, self.edges, side="left") for week in ds.arrivals_by_week]
        )
        self._pooled_idx = np.searchsorted(ds.pooled, self.edges, side="left")
        self._cache: dict[tuple[int, int], IntervalEval] = {}

    def with_weight(self, w: float) -> "PartitionProblem":
        """Same data and grid with another smoothness weight; shares the interval cache."""
        if w < 0:
            raise ValueError("w must be non-negative")
        clone = object.__new__(PartitionProblem)
        clone.__dict__.update(self.__dict__)
        clone.w = float(w)
        return clone

    def interval(self, lo: int, hi: int) -> IntervalEval:
        key = (lo, hi)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        a, b = float(self.edges[lo]), float(self.edges[hi])
        counts = self._week_cum[:, hi] - self._week_cum[:, lo]
        k = int(counts.sum())
        m = self.ds.m
        mu = k / m
        rate = mu / (b - a)
        times = self.ds.pooled[self._pooled_idx[lo]:self._pooled_idx[hi]]
        ks = ks_from_taus((times - a) / (b - a), self.cfg)
        disp = dispersion_test(counts, self.cfg)
        g = ks.d_stat - ks.critical
        h = disp.ds_stat - disp.critical
        shortfall = max(0, self.grid.ell_units - (hi - lo)) * self.grid.unit_hours
        cells = self.er.rates[lo * self.cells_per_unit:hi * self.cells_per_unit]
        terms = (rate - cells) ** 2
        terms.setflags(write=False)
        result = IntervalEval(
            lo, hi, a, b, tuple(int(c) for c in counts), k, mu, rate,
            ks, disp, g, h, shortfall, terms,
        )
        self._cache[key] = result
        return result

    def evaluate(self, p: Partition) -> EvalResult:
        if p.grid != self.grid:
            raise ValueError("partition grid does not match the problem grid")
        ivs = tuple(self.interval(lo, hi) for lo, hi in p.intervals)
        E = math.fsum(np.concatenate([iv.fit_terms for iv in ivs]))
        S = math.fsum((b.rate - a.rate) ** 2 for a, b in zip(ivs, ivs[1:]))
        f = E + self.w * S
        violation = max(iv.max_violation for iv in ivs)
        total = math.fsum(iv.violation for iv in ivs)
        return EvalResult(p, ivs, self.w, E, S, f, violation, total, violation == 0.0)


def evaluate(
    p: Partition,
    ds: ArrivalDataset,
    er: EmpiricalRate,
    w: float,
    cfg: TestConfig = TestConfig(),
    grid: PartitionGrid | None = None,
) -> EvalResult:
    """One-off evaluation; build a :class:`PartitionProblem` for repeated use."""
    return PartitionProblem(ds, er, w, cfg, grid or p.grid).evaluate(p)
