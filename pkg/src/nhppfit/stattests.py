"""Per-interval CU Kolmogorov-Smirnov and dispersion tests."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .distributions import chi2_p_value, chi2_quantile, ks_critical, ks_p_value
from .ingest import ArrivalDataset

__all__ = [
    "TestConfig",
    "TestStatus",
    "KsResult",
    "DispersionResult",
    "rescale_times",
    "ks_statistic",
    "ks_critical",
    "ks_p_value",
    "cu_ks_test",
    "chi2_quantile",
    "chi2_p_value",
    "dispersion_test",
    "pooled_times",
]


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class

    alpha: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


class TestStatus(str, enum.Enum):
    __test__ = False

    ACCEPTED = "accepted"
    REJECTED = "rejected"
    UNTESTABLE = "untestable"


@dataclass(frozen=True)
class KsResult:
    """CU KS outcome on one interval.

    ``d_stat`` and ``critical`` are NaN when the interval holds no arrivals.
    """

    k: int
    d_stat: float
    critical: float
    status: TestStatus

    @property
    def accepted(self) -> bool:
        return self.status is TestStatus.ACCEPTED

    @property
    def untestable(self) -> bool:
        return self.status is TestStatus.UNTESTABLE

    @cached_property
    def p_value(self) -> float | None:
        if self.untestable:
            return None
        return ks_p_value(self.k, self.d_stat)


@dataclass(frozen=True)
class DispersionResult:
    m: int
    ds_stat: float
    critical: float
    status: TestStatus

    @property
    def accepted(self) -> bool:
        return self.status is TestStatus.ACCEPTED

    @property
    def untestable(self) -> bool:
        return self.status is TestStatus.UNTESTABLE

    @cached_property
    def p_value(self) -> float | None:
        if self.untestable:
            return None
        return chi2_p_value(self.m - 1, self.ds_stat)


def rescale_times(times: Sequence[float] | np.ndarray, a: float, b: float) -> np.ndarray:
    """Map arrival times on ``[a, b)`` to ``[0, 1)``, preserving order."""
    if not a < b:
        raise ValueError("need a < b")
    t = np.asarray(times, dtype=float)
    if t.size and (t.min() < a or t.max() >= b):
        raise ValueError(f"times must lie in [{a}, {b})")
    return (t - a) / (b - a)


def ks_statistic(taus: Sequence[float] | np.ndarray) -> float:
    """Exact sup |F_k(t) - t| for the empirical cdf of ``taus`` on [0, 1]."""
    x = np.sort(np.asarray(taus, dtype=float))
    k = x.size
    if k == 0:
        raise ValueError("KS statistic needs at least one observation")
    j = np.arange(1, k + 1)
    d_plus = np.max(j / k - x)
    d_minus = np.max(x - (j - 1) / k)
    return float(max(d_plus, d_minus))


def pooled_times(ds: ArrivalDataset, a: float, b: float) -> np.ndarray:
    """Union over weeks of the arrival times in ``[a, b)``, sorted."""
    lo = np.searchsorted(ds.pooled, a, side="left")
    hi = np.searchsorted(ds.pooled, b, side="left")
    return ds.pooled[lo:hi]


def ks_from_taus(taus: np.ndarray, cfg: TestConfig) -> KsResult:
    k = int(taus.size)
    if k == 0:
        return KsResult(0, math.nan, math.nan, TestStatus.UNTESTABLE)
    d = ks_statistic(taus)
    crit = ks_critical(k, cfg.alpha)
    status = TestStatus.ACCEPTED if d <= crit else TestStatus.REJECTED
    return KsResult(k, d, crit, status)


def cu_ks_test(ds: ArrivalDataset, a: float, b: float, cfg: TestConfig = TestConfig()) -> KsResult:
    """Conditional-uniform KS test of the pooled arrivals on ``[a, b)``."""
    return ks_from_taus(rescale_times(pooled_times(ds, a, b), a, b), cfg)


def dispersion_test(counts: Sequence[int], cfg: TestConfig = TestConfig()) -> DispersionResult:
    """Chi-squared test that the weekly counts share one Poisson mean."""
    k = np.asarray(counts, dtype=float)
    m = int(k.size)
    if m < 2:
        raise ValueError("dispersion test needs at least two weeks")
    crit = chi2_quantile(m - 1, cfg.alpha)
    mu = k.mean()
    if mu == 0:
        return DispersionResult(m, math.nan, crit, TestStatus.UNTESTABLE)
    ds_stat = float(np.sum((k - mu) ** 2) / mu)
    status = TestStatus.ACCEPTED if ds_stat <= crit else TestStatus.REJECTED
    return DispersionResult(m, ds_stat, crit, status)
