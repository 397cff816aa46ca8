"""Synthetic NHPP arrivals with known piecewise-constant rates."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Sequence

import numpy as np

from .ingest import HOURS_PER_DAY, ArrivalDataset, Weekday


@dataclass(frozen=True)
class TrueRate:
    """Piecewise-constant rate; ``segments`` are (start, end, rate per hour)."""

    segments: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        segs = tuple((float(a), float(b), float(r)) for a, b, r in self.segments)
        if not segs:
            raise ValueError("at least one segment is required")
        if segs[0][0] != 0.0 or segs[-1][1] != HOURS_PER_DAY:
            raise ValueError("segments must cover [0, 24)")
        for (a, b, r), nxt in zip(segs, segs[1:] + (None,)):
            if not a < b:
                raise ValueError(f"empty segment [{a}, {b})")
            if r < 0:
                raise ValueError("rates must be non-negative")
            if nxt is not None and nxt[0] != b:
                raise ValueError(f"gap or overlap at {b} h")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, rate: float) -> "TrueRate":
        return cls(((0.0, HOURS_PER_DAY, rate),))

    @classmethod
    def parse(cls, text: str) -> "TrueRate":
        """Parse ``"0-12:2,12-24:6"``."""
        segs = []
        for part in text.split(","):
            try:
                span, rate = part.strip().split(":")
                a, b = span.split("-")
                segs.append((float(a), float(b), float(rate)))
            except ValueError:
                raise ValueError(f"bad segment {part!r}; expected start-end:rate") from None
        return cls(tuple(segs))

    @property
    def breakpoints(self) -> list[float]:
        """Interior hours where the rate changes."""
        return [b for (_, b, r), (_, _, r2) in zip(self.segments, self.segments[1:]) if r != r2]

    @property
    def max_rate(self) -> float:
        return max(r for _, _, r in self.segments)

    def rate_at(self, t: np.ndarray) -> np.ndarray:
        starts = np.array([a for a, _, _ in self.segments])
        rates = np.array([r for _, _, r in self.segments])
        idx = np.searchsorted(starts, np.asarray(t, dtype=float), side="right") - 1
        return rates[idx]


@dataclass(frozen=True)
class OverdispersionSpec:
    """Per-week multiplicative scale applied to the whole rate."""

    week_scale: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        scales = tuple(float(s) for s in self.week_scale)
        if any(s <= 0 for s in scales):
            raise ValueError("week scale factors must be positive")
        object.__setattr__(self, "week_scale", scales)

    @classmethod
    def identity(cls, m: int) -> "OverdispersionSpec":
        return cls((1.0,) * m)

    @classmethod
    def alternating(cls, m: int, factors: Sequence[float]) -> "OverdispersionSpec":
        return cls(tuple(factors[r % len(factors)] for r in range(m)))

    def scale(self, r: int) -> float:
        return self.week_scale[r] if self.week_scale else 1.0


def expected_counts(rate: TrueRate, a: float, b: float) -> float:
    """Integral of the rate over ``[a, b)``."""
    if not 0.0 <= a < b <= HOURS_PER_DAY:
        raise ValueError("need 0 <= a < b <= 24")
    return sum(r * max(0.0, min(b, hi) - max(a, lo)) for lo, hi, r in rate.segments)


def _thin_week(rate: TrueRate, scale: float, rng: np.random.Generator) -> np.ndarray:
    lam_max = rate.max_rate * scale
    if lam_max == 0:
        return np.empty(0)
    n = rng.poisson(lam_max * HOURS_PER_DAY)
    cand = rng.uniform(0.0, HOURS_PER_DAY, size=n)
    keep = rng.uniform(0.0, 1.0, size=n) * lam_max < rate.rate_at(cand) * scale
    times = np.sort(cand[keep])
    # ties have probability zero but floats are finite
    for i in range(1, times.size):
        if times[i] <= times[i - 1]:
            times[i] = np.nextafter(times[i - 1], np.inf)
    return times[times < HOURS_PER_DAY]


def generate(
    rate: TrueRate,
    m: int,
    od: OverdispersionSpec | None = None,
    seed: int | None = None,
    weekday: Weekday | str = Weekday.TUE,
) -> ArrivalDataset:
    """Simulate ``m`` independent weeks by thinning against the peak rate."""
    if m < 1:
        raise ValueError("m must be at least 1")
    od = od or OverdispersionSpec()
    if od.week_scale and len(od.week_scale) != m:
        raise ValueError(f"need {m} week scale factors, got {len(od.week_scale)}")
    children = np.random.SeedSequence(seed).spawn(m)
    weeks = tuple(
        _thin_week(rate, od.scale(r), np.random.default_rng(child))
        for r, child in enumerate(children)
    )
    weekday = Weekday.parse(weekday)
    return ArrivalDataset(weekday, weeks, tuple(weekday_dates(weekday, m)))


def weekday_dates(weekday: Weekday | str, m: int, start: date = date(2018, 1, 1)) -> list[date]:
    """First ``m`` dates on ``weekday`` on or after ``start``."""
    weekday = Weekday.parse(weekday)
    first = start + timedelta(days=(weekday - start.weekday()) % 7)
    return [first + timedelta(weeks=r) for r in range(m)]


def to_timestamps(ds: ArrivalDataset, start: date = date(2018, 1, 1)) -> list[str]:
    """Render arrivals as second-resolution ISO timestamps.

    Rounding to whole seconds can collide two arrivals; a collision is
    moved to the next free second of the same day (or the previous one at
    the end of the day).
    """
    out = []
    dates = weekday_dates(ds.weekday, ds.m, start)
    last_second = int(HOURS_PER_DAY * 3600) - 1
    for day, week in zip(dates, ds.arrivals_by_week):
        taken: set[int] = set()
        base = datetime(day.year, day.month, day.day)
        for t in week:
            sec = min(int(np.floor(t * 3600.0 + 0.5)), last_second)
            while sec in taken and sec < last_second:
                sec += 1
            while sec in taken:
                sec -= 1
            taken.add(sec)
            out.append((base + timedelta(seconds=sec)).isoformat())
    return out


def write_csv(ds: ArrivalDataset, path: str | Path, start: date = date(2018, 1, 1)) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp"])
        for ts in to_timestamps(ds, start):
            writer.writerow([ts])
