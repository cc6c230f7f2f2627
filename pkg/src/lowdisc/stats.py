"""Normal and Student-t distribution functions used by the stopping rules.

The normal quantile is Acklam's rational approximation (relative error
about 1e-9) polished by one Halley step against ``math.erfc``.  The
Student-t CDF uses the finite trigonometric series that holds for integer
degrees of freedom, and its quantile is found by bisection.
"""
from __future__ import annotations

import math

import numpy as np

_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425

_erfc_obj = np.frompyfunc(math.erfc, 1, 1)


def _erfc(x) -> np.ndarray:
    return np.asarray(_erfc_obj(x), dtype=np.float64)


def norm_cdf(x):
    return 0.5 * _erfc(-np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def _acklam_lower(p: np.ndarray) -> np.ndarray:
    """Initial quantile for ``0 < p <= 0.5``."""
    x = np.empty_like(p)
    tail = p < _P_LOW
    q = np.sqrt(-2.0 * np.log(p[tail]))
    c, d = _C, _D
    x[tail] = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
        (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p[~tail] - 0.5
    r = q * q
    a, b = _A, _B
    x[~tail] = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
        ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    return x


def norm_ppf(u):
    """Standard normal quantile; ``u`` must lie strictly inside (0, 1).

    Upper-half inputs are reflected as ``-norm_ppf(1 - u)`` so the result is
    exactly odd whenever ``1 - u`` is exact.
    """
    u = np.asarray(u, dtype=np.float64)
    if np.any(~(u > 0.0) | ~(u < 1.0)):
        bad = u[~((u > 0.0) & (u < 1.0))].ravel()[0]
        raise ValueError(f"normal quantile of {bad!r} is not finite")
    upper = u > 0.5
    p = np.where(upper, 1.0 - u, u)
    x = _acklam_lower(p)
    e = 0.5 * _erfc(-x / math.sqrt(2.0)) - p
    step = e * math.sqrt(2.0 * math.pi) * np.exp(0.5 * x * x)
    x = x - step / (1.0 + 0.5 * x * step)
    x = np.where(upper, -x, x)
    return x if x.ndim else float(x)


def student_t_cdf(t: float, df: int) -> float:
    """CDF of Student's t for integer ``df >= 1``."""
    if df < 1 or int(df) != df:
        raise ValueError("degrees of freedom must be a positive integer")
    theta = math.atan(abs(t) / math.sqrt(df))
    s, c = math.sin(theta), math.cos(theta)
    c2 = c * c
    if df % 2:
        acc, term = 0.0, c
        for k in range(1, (df - 1) // 2 + 1):
            acc += term
            term *= c2 * (2 * k) / (2 * k + 1)
        a = 2.0 / math.pi * (theta + s * acc) if df > 1 else 2.0 * theta / math.pi
    else:
        acc, term = 0.0, 1.0
        for k in range(1, df // 2 + 1):
            acc += term
            term *= c2 * (2 * k - 1) / (2 * k)
        a = s * acc
    return 0.5 + math.copysign(0.5 * a, t) if t else 0.5


def student_t_ppf(p: float, df: int) -> float:
    """Quantile of Student's t for integer ``df`` by bisection to full precision."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_ppf(1.0 - p, df)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, df) < p:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
