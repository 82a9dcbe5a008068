"""Student-t tail probabilities, one-sample t-tests and Bonferroni gating."""

from __future__ import annotations

import math

import numpy as np

P_FLOOR = 1e-300
STD_FLOOR = 1e-12

_TINY = 1e-300
_EPS = 1e-16
_MAX_ITER = 1000


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Continued fraction for I_x(a, b) (modified Lentz), vectorised over ``x``."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x, one_minus_x=None) -> np.ndarray:
    """I_x(a, b) for scalar shape parameters and array ``x`` in [0, 1].

    ``one_minus_x`` may be passed when ``1 - x`` is known more accurately than
    the subtraction would give.
    """
    x = np.asarray(x, dtype=np.float64)
    y = 1.0 - x if one_minus_x is None else np.asarray(one_minus_x, dtype=np.float64)
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    out = np.empty(np.broadcast(x, y).shape)
    x, y = np.broadcast_arrays(x, y)
    zero = x <= 0.0
    one = y <= 0.0
    mid = ~(zero | one)
    out[zero] = 0.0
    out[one] = 1.0
    if mid.any():
        xm, ym = x[mid], y[mid]
        log_front = a * np.log(xm) + b * np.log(ym) - _log_beta(a, b)
        front = np.exp(log_front)
        direct = xm < (a + 1.0) / (a + b + 2.0)
        res = np.empty(xm.shape)
        if direct.any():
            res[direct] = front[direct] * _beta_cf(a, b, xm[direct]) / a
        if (~direct).any():
            res[~direct] = 1.0 - front[~direct] * _beta_cf(b, a, ym[~direct]) / b
        out[mid] = res
    return out


def student_t_sf(t, df: float):
    """Upper-tail probability P(T > t) for Student's t with ``df`` degrees of freedom.

    Uses P(T > |t|) = I_{df/(df+t^2)}(df/2, 1/2) / 2. Accepts scalars or arrays.
    """
    if not df >= 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    arr = np.asarray(t, dtype=np.float64)
    t2 = arr * arr
    denom = df + t2
    with np.errstate(invalid="ignore"):
        x = np.where(np.isinf(t2), 0.0, df / denom)
        y = np.where(np.isinf(t2), 1.0, t2 / denom)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x, y)
    sf = np.where(arr >= 0, tail, 1.0 - tail)
    return float(sf) if sf.ndim == 0 else sf


def t_statistics(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise one-sample t statistic and two-sided p against mean 0.

    ``samples`` has shape (K, B). The sample std (ddof=1) is clamped below at
    1e-12, so constant non-zero rows give huge |t| and p near 0.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n = samples.shape[1]
    if n < 2:
        raise ValueError("need at least two samples for a t-test")
    mean = samples.mean(axis=1)
    s = np.maximum(samples.std(axis=1, ddof=1), STD_FLOOR)
    t = mean / (s / math.sqrt(n))
    p = np.minimum(2.0 * np.asarray(student_t_sf(np.abs(t), n - 1)), 1.0)
    return t, p


def t_test_one_sample(samples) -> tuple[float, float]:
    """Two-sided one-sample t-test of ``samples`` against zero."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size < 2:
        raise ValueError("need at least two samples for a t-test")
    t, p = t_statistics(samples[None, :])
    return float(t[0]), float(p[0])


def bonferroni_threshold(alpha: float, k: int) -> float:
    if k < 1:
        raise ValueError("number of tests K must be >= 1")
    return alpha / k


class UndefinedCorrelationError(ValueError):
    """Raised when one of the inputs has zero variance."""


def pearson(x, y) -> float:
    """Product-moment correlation; raises on length mismatch or zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two equal-length vectors of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a zero-variance input")
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))
