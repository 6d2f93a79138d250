"""Student-t distribution and Pearson correlation with exact p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import LengthMismatch, TooFewPoints, ZeroVariance

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 20000


def _beta_cf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, y: float | None = None) -> float:
    """Regularized incomplete beta function I_x(a, b).

    ``y`` may carry ``1 - x`` when it is known more accurately than the
    subtraction would give.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if y is None:
        y = 1.0 - x
    if not (0.0 <= x <= 1.0):
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if y == 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, y) / b


def t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|)."""
    if df <= 0:
        raise ValueError("df must be positive")
    t2 = t * t
    if math.isinf(t2):
        return 0.0
    return betainc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))


def t_cdf(t: float, df: float) -> float:
    """Student-t cumulative distribution function."""
    if math.isnan(t):
        return math.nan
    half_tail = 0.5 * t_sf2(t, df)
    return 1.0 - half_tail if t > 0 else half_tail


def t_ppf(q: float, df: float) -> float:
    """Quantile of the Student-t distribution, by root-finding on :func:`t_cdf`."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_ppf(1.0 - q, df)
    hi = 1.0
    while t_cdf(hi, df) < q:
        hi *= 2.0
    return brentq(lambda t: t_cdf(t, df) - q, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    p_value: float
    significant: bool
    alpha: float = 0.05


def pearson_r(x, y) -> float:
    x, y = _check_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(np.dot(xc, yc) / (np.linalg.norm(xc) * np.linalg.norm(yc)))
    return min(1.0, max(-1.0, r))


def _check_pair(x, y, min_n=2):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise LengthMismatch(f"x has {x.size} values, y has {y.size}")
    if x.size < min_n:
        raise TooFewPoints(f"need at least {min_n} points, got {x.size}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ZeroVariance("correlation is undefined for a constant variable")
    return x, y


def pearson(x, y, alpha: float = 0.05) -> CorrelationResult:
    """Pearson correlation with a two-sided t-test p-value on n - 2 df."""
    x, y = _check_pair(x, y, min_n=3)
    r = pearson_r(x, y)
    n = x.size
    df = n - 2
    # P(|T| >= |t|) with t = r sqrt(df / (1 - r^2)) equals I_{1-r^2}(df/2, 1/2)
    p = betainc(0.5 * df, 0.5, 1.0 - r * r, r * r) if abs(r) < 1.0 else 0.0
    return CorrelationResult(r=r, n=n, p_value=p, significant=p < alpha, alpha=alpha)


def weighted_pearson_r(x, y, weights) -> float:
    """Pearson correlation under observation weights (normalised to sum 1)."""
    x, y = _check_pair(x, y)
    w = np.asarray(weights, dtype=float).ravel()
    if w.shape != x.shape:
        raise LengthMismatch(f"{w.size} weights for {x.size} observations")
    w = w / w.sum()
    xc = x - np.dot(w, x)
    yc = y - np.dot(w, y)
    r = float(np.dot(w * xc, yc) / math.sqrt(np.dot(w * xc, xc) * np.dot(w * yc, yc)))
    return min(1.0, max(-1.0, r))
