"""Fine-grid empirical arrival rate (default 96 cells of 15 minutes)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import HOURS_PER_DAY, ArrivalDataset

DEFAULT_CELLS = 96

_ALIGN_TOL = 1e-9


def grid_edges(n: int) -> np.ndarray:
    """Hours of the ``n + 1`` points splitting the day into ``n`` equal parts.

    Computed as ``24 * i / n`` so that a coarser grid dividing ``n`` yields
    bit-identical shared edges.
    """
    return HOURS_PER_DAY * np.arange(n + 1) / n


@dataclass(frozen=True)
class EmpiricalRate:
    """Per-cell average arrival rate in arrivals per hour.

    Attributes:
        rates: read-only array of ``cells`` non-negative rates.
        m: number of weeks averaged.
    """

    rates: np.ndarray
    m: int = 1

    def __post_init__(self) -> None:
        rates = np.array(self.rates, dtype=float)
        if rates.ndim != 1 or rates.size < 1:
            raise ValueError("rates must be a non-empty 1-d array")
        if np.any(rates < 0):
            raise ValueError("rates must be non-negative")
        rates.setflags(write=False)
        object.__setattr__(self, "rates", rates)

    @property
    def cells(self) -> int:
        return int(self.rates.size)

    @property
    def cell_width(self) -> float:
        return HOURS_PER_DAY / self.cells

    def cell_starts(self) -> np.ndarray:
        return grid_edges(self.cells)[:-1]

    def cell_index(self, hour: float) -> int:
        """Grid index of a cell-aligned time; raises if misaligned."""
        pos = hour / self.cell_width
        idx = int(round(pos))
        if abs(pos - idx) > _ALIGN_TOL or not 0 <= idx <= self.cells:
            raise ValueError(f"{hour} h is not aligned to the {self.cell_width} h cell grid")
        return idx

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmpiricalRate):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.rates, other.rates)

    __hash__ = None  # type: ignore[assignment]


def build_empirical(ds: ArrivalDataset, cells: int = DEFAULT_CELLS) -> EmpiricalRate:
    """Average the per-week cell counts and divide by the cell width."""
    if cells < 1:
        raise ValueError("cells must be positive")
    m = ds.m
    if m == 0:
        return EmpiricalRate(np.zeros(cells), m=0)
    width = HOURS_PER_DAY / cells
    edges = grid_edges(cells)
    counts = np.zeros(cells)
    for week in ds.arrivals_by_week:
        counts += np.diff(np.searchsorted(week, edges, side="left"))
    return EmpiricalRate(counts / m / width, m=m)


def rate_mass(er: EmpiricalRate, a: float, b: float) -> float:
    """Expected arrivals on the cell-aligned interval ``[a, b)``."""
    lo, hi = er.cell_index(a), er.cell_index(b)
    if lo >= hi:
        raise ValueError("interval must have positive length")
    return float(np.sum(er.rates[lo:hi]) * er.cell_width)
