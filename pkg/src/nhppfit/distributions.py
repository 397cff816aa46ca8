"""Null distributions for the per-interval tests.

Two-sided one-sample Kolmogorov statistic:

* ``k <= EXACT_KS_LIMIT``: exact cdf via the Durbin matrix formulation
  (Marsaglia, Tsang & Wang 2003), with the Birnbaum-Tingey one-sided tail
  used for right-tail probabilities too small for ``1 - cdf``.
* ``k > EXACT_KS_LIMIT``: asymptotic Kolmogorov tail with Stephens'
  small-sample correction.

Chi-squared upper quantiles are found by bisection on the regularized
lower incomplete gamma function.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammainc, gammaincc

EXACT_KS_LIMIT = 140

# below this, 1 - cdf has too few significant digits; switch to the tail sum
_TAIL_SWITCH = 1e-7


def _matrix_power_scaled(h: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """Return (Q, log_scale) with H**n == Q * exp(log_scale)."""
    result = np.eye(h.shape[0])
    log_scale = 0.0
    base = h.copy()
    base_log = 0.0
    while n:
        if n & 1:
            result = result @ base
            log_scale += base_log
            peak = np.abs(result).max()
            if peak > 0:
                result /= peak
                log_scale += math.log(peak)
        n >>= 1
        if n:
            base = base @ base
            base_log *= 2
            peak = np.abs(base).max()
            if peak > 0:
                base /= peak
                base_log += math.log(peak)
    return result, log_scale


def _durbin_cdf(n: int, d: float) -> float:
    """P(D_n < d) for the two-sided statistic, exact."""
    k = int(math.floor(n * d)) + 1
    m = 2 * k - 1
    h = k - n * d

    idx = np.arange(m)
    diff = idx[:, None] - idx[None, :] + 1
    H = (diff >= 0).astype(float)
    powers = h ** np.arange(1, m + 1)
    H[:, 0] -= powers
    H[m - 1, :] -= powers[::-1]
    if 2 * h - 1 > 0:
        H[m - 1, 0] += (2 * h - 1) ** m
    inv_fact = np.exp(-np.array([math.lgamma(v + 1) if v > 0 else 0.0 for v in diff.ravel()]))
    H *= inv_fact.reshape(m, m)

    Q, log_scale = _matrix_power_scaled(H, n)
    entry = Q[k - 1, k - 1]
    if entry <= 0:
        return 0.0
    log_p = math.log(entry) + log_scale + math.lgamma(n + 1) - n * math.log(n)
    return min(1.0, math.exp(log_p))


def _smirnov_one_sided_sf(n: int, d: float) -> float:
    """P(D_n^+ >= d), exact finite sum (Birnbaum & Tingey 1951)."""
    if d <= 0:
        return 1.0
    if d >= 1:
        return 0.0
    jmax = int(math.floor(n * (1 - d)))
    terms = []
    for j in range(jmax + 1):
        lo = 1 - d - j / n
        hi = d + j / n
        if lo <= 0:
            continue
        log_term = (
            math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
            + (n - j) * math.log(lo) + (j - 1) * math.log(hi)
        )
        terms.append(math.exp(log_term))
    return min(1.0, d * math.fsum(terms))


def kolmogorov_sf(x: float) -> float:
    """Asymptotic Kolmogorov tail Q(x) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2)."""
    if x <= 0:
        return 1.0
    if x < 0.2:
        # alternating series converges too slowly here; Q(0.2) = 1 - 6e-27
        return 1.0
    total = 0.0
    sign = 1.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * x * x)
        total += sign * term
        if term < 1e-17 * max(total, 1e-300):
            break
        sign = -sign
        j += 1
    return min(1.0, max(0.0, 2.0 * total))


def _stephens_scale(k: int) -> float:
    rk = math.sqrt(k)
    return rk + 0.12 + 0.11 / rk


def ks_cdf(k: int, d: float) -> float:
    """P(D_k < d) under the null, in the regime chosen by ``k``."""
    if k < 1:
        raise ValueError("sample size must be at least 1")
    if d <= 0.5 / k:
        return 0.0
    if d >= 1.0:
        return 1.0
    if k <= EXACT_KS_LIMIT:
        return _durbin_cdf(k, d)
    return 1.0 - kolmogorov_sf(d * _stephens_scale(k))


def ks_p_value(k: int, d: float) -> float:
    """Right-tail probability P(D_k >= d) under the null."""
    if k < 1:
        raise ValueError("sample size must be at least 1")
    if d <= 0.5 / k:
        return 1.0
    if d >= 1.0:
        return 0.0
    if k > EXACT_KS_LIMIT:
        return kolmogorov_sf(d * _stephens_scale(k))
    p = 1.0 - _durbin_cdf(k, d)
    if p < _TAIL_SWITCH:
        # for d >= 1/2 the two one-sided events are disjoint, so this is exact;
        # below that the overlap is O(p^2)
        p = min(1.0, 2.0 * _smirnov_one_sided_sf(k, d))
    return max(0.0, p)


@lru_cache(maxsize=4096)
def ks_critical(k: int, alpha: float = 0.05) -> float:
    """Upper alpha quantile T(k, alpha) of the two-sided statistic."""
    if k < 1:
        raise ValueError("sample size must be at least 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if k > EXACT_KS_LIMIT:
        lo, hi = 0.0, 5.0
        while hi - lo > 1e-13:
            mid = 0.5 * (lo + hi)
            if kolmogorov_sf(mid) > alpha:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi) / _stephens_scale(k)
    lo, hi = 0.5 / k, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if ks_p_value(k, mid) > alpha:
            lo = mid
        else:
            hi = mid
    return hi


def chi2_p_value(dof: int, x: float) -> float:
    """Upper tail 1 - P(dof/2, x/2) of the chi-squared distribution."""
    if dof < 1:
        raise ValueError("degrees of freedom must be at least 1")
    if x <= 0:
        return 1.0
    return float(gammaincc(dof / 2.0, x / 2.0))


@lru_cache(maxsize=1024)
def chi2_quantile(dof: int, alpha: float = 0.05, tol: float = 1e-10) -> float:
    """Upper alpha critical value of chi-squared with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ValueError("degrees of freedom must be at least 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    target = 1.0 - alpha
    lo, hi = 0.0, float(max(1, dof))
    while gammainc(dof / 2.0, hi / 2.0) < target:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gammainc(dof / 2.0, mid / 2.0) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
