"""Loading timestamped arrivals into per-week time-of-day samples."""

from __future__ import annotations

import csv
import enum
import math
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Sequence

import numpy as np

HOURS_PER_DAY = 24.0

# 24:00:00 maps to the last representable instant of the same day
_MIDNIGHT_END = math.nextafter(HOURS_PER_DAY, 0.0)

_TIMESTAMP_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})$")


class Weekday(enum.IntEnum):
    MON = 0
    TUE = 1
    WED = 2
    THU = 3
    FRI = 4
    SAT = 5
    SUN = 6

    @classmethod
    def parse(cls, value: "str | int | Weekday") -> "Weekday":
        if isinstance(value, Weekday):
            return value
        if isinstance(value, int):
            return cls(value)
        key = value.strip().upper()[:3]
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown weekday {value!r}; use one of mon..sun") from None

    @property
    def label(self) -> str:
        return self.name.lower()


class IngestError(ValueError):
    """Raised when an arrivals file cannot be turned into a dataset."""


class InsufficientWeeksError(IngestError):
    pass


class DuplicateTimestampError(IngestError):
    """Two arrivals share the same second on the same day (a batch arrival)."""

    def __init__(self, instants: Sequence[str]):
        self.instants = list(instants)
        shown = ", ".join(self.instants[:10])
        more = "" if len(self.instants) <= 10 else f" (+{len(self.instants) - 10} more)"
        super().__init__(f"duplicate arrival timestamps: {shown}{more}")


@dataclass(frozen=True)
class ArrivalRecord:
    timestamp: datetime
    hours: float  # time of day, in [0, 24)

    @property
    def day(self) -> date:
        return self.timestamp.date()


def parse_timestamp(text: str) -> ArrivalRecord:
    """Parse ``YYYY-MM-DDThh:mm:ss``; ``24:00:00`` is accepted as end of day."""
    match = _TIMESTAMP_RE.match(text.strip())
    if match is None:
        raise IngestError(f"malformed timestamp {text!r}; expected YYYY-MM-DDThh:mm:ss")
    year, month, day, hh, mm, ss = (int(g) for g in match.groups())
    try:
        if hh == 24 and mm == 0 and ss == 0:
            ts = datetime(year, month, day, 23, 59, 59)
            return ArrivalRecord(ts, _MIDNIGHT_END)
        ts = datetime(year, month, day, hh, mm, ss)
    except ValueError as exc:
        raise IngestError(f"invalid timestamp {text!r}: {exc}") from None
    return ArrivalRecord(ts, hh + mm / 60.0 + ss / 3600.0)


@dataclass(frozen=True)
class ArrivalDataset:
    """Arrival times of day (hours) for ``m`` occurrences of one weekday.

    ``arrivals_by_week[r]`` is a sorted, read-only float array. ``pooled`` is
    the sorted union over weeks (ties across weeks are kept).
    """

    weekday: Weekday
    arrivals_by_week: tuple[np.ndarray, ...]
    dates: tuple[date, ...] = ()
    pooled: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        weeks = []
        for r, times in enumerate(self.arrivals_by_week):
            arr = np.array(times, dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"week {r}: expected a 1-d sequence of times")
            if arr.size and (arr.min() < 0.0 or arr.max() >= HOURS_PER_DAY):
                raise ValueError(f"week {r}: times must lie in [0, 24)")
            arr.sort()
            if arr.size > 1 and np.any(np.diff(arr) == 0.0):
                raise ValueError(f"week {r}: identical arrival times (batch arrivals)")
            arr.setflags(write=False)
            weeks.append(arr)
        object.__setattr__(self, "arrivals_by_week", tuple(weeks))
        object.__setattr__(self, "weekday", Weekday.parse(self.weekday))
        pooled = np.sort(np.concatenate(weeks)) if weeks else np.empty(0)
        pooled.setflags(write=False)
        object.__setattr__(self, "pooled", pooled)

    @property
    def m(self) -> int:
        return len(self.arrivals_by_week)

    @property
    def total(self) -> int:
        return int(self.pooled.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArrivalDataset):
            return NotImplemented
        return (
            self.weekday == other.weekday
            and self.dates == other.dates
            and self.m == other.m
            and all(np.array_equal(a, b) for a, b in zip(self.arrivals_by_week, other.arrivals_by_week))
        )

    __hash__ = None  # type: ignore[assignment]


def count_in_interval(ds: ArrivalDataset, a: float, b: float) -> tuple[list[int], int]:
    """Per-week counts on ``[a, b)`` and their sum."""
    if not 0.0 <= a < b <= HOURS_PER_DAY:
        raise ValueError(f"interval [{a}, {b}) must satisfy 0 <= a < b <= 24")
    per_week = [
        int(np.searchsorted(w, b, side="left") - np.searchsorted(w, a, side="left"))
        for w in ds.arrivals_by_week
    ]
    return per_week, sum(per_week)


def read_records(path: "str | Path") -> list[ArrivalRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "timestamp" not in reader.fieldnames:
            raise IngestError(f"{path}: missing 'timestamp' header")
        records = []
        for lineno, row in enumerate(reader, start=2):
            raw = row.get("timestamp")
            if raw is None or not raw.strip():
                raise IngestError(f"{path}:{lineno}: empty timestamp")
            try:
                records.append(parse_timestamp(raw))
            except IngestError as exc:
                raise IngestError(f"{path}:{lineno}: {exc}") from None
    return records


def select_weeks(records: Sequence[ArrivalRecord], weekday: "Weekday | str", m: int) -> ArrivalDataset:
    """Group records by date and keep the first ``m`` dates falling on ``weekday``."""
    weekday = Weekday.parse(weekday)
    if m < 1:
        raise ValueError("number of weeks must be positive")
    by_day: dict[date, list[ArrivalRecord]] = {}
    for rec in records:
        if rec.day.weekday() == weekday:
            by_day.setdefault(rec.day, []).append(rec)
    days = sorted(by_day)
    if len(days) < m:
        raise InsufficientWeeksError(
            f"found {len(days)} {weekday.label} dates, need {m}"
        )
    days = days[:m]

    dupes = []
    weeks = []
    for day in days:
        hours = sorted(rec.hours for rec in by_day[day])
        seen = set()
        for rec in sorted(by_day[day], key=lambda r: r.hours):
            if rec.hours in seen:
                dupes.append(rec.timestamp.isoformat())
            seen.add(rec.hours)
        weeks.append(hours)
    if dupes:
        raise DuplicateTimestampError(sorted(set(dupes)))
    return ArrivalDataset(weekday, tuple(np.asarray(w, dtype=float) for w in weeks), tuple(days))


def load_arrivals(path: "str | Path", weekday: "Weekday | str", m: int) -> ArrivalDataset:
    """Read an arrivals CSV and return the first ``m`` weeks of ``weekday``."""
    return select_weeks(read_records(path), weekday, m)
