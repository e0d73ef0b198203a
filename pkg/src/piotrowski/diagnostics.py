"""Goodness of fit and significance for binomial logit fits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .binning import BinSeries, Weighting

__all__ = [
    "LrTest",
    "NestingViolationError",
    "chi_square_sf",
    "fit_null",
    "lr_test",
    "mcfadden_r2",
    "regularized_gamma_q",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 100_000

# Relative slack for round-off when comparing nested log-likelihoods.
NESTING_RTOL = 1e-9


class NestingViolationError(ArithmeticError):
    """The fitted model scored below its own intercept-only sub-model."""


@dataclass(frozen=True)
class LrTest:
    statistic: float
    df: int
    p_value: float


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_continued_fraction(a: float, x: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma ``Q(a, x) = Γ(a, x) / Γ(a)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_p_series(a, x))
    return min(1.0, _gamma_q_continued_fraction(a, x))


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail probability of a chi-square variable with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError("df must be a positive integer")
    if x < 0:
        raise ValueError("x must be non-negative")
    return regularized_gamma_q(df / 2.0, x / 2.0)


def mcfadden_r2(loglik: float, loglik_null: float) -> float:
    """McFadden pseudo-R², ``1 - loglik / loglik_null``.

    Raises:
        NestingViolationError: if ``loglik`` falls below ``loglik_null``.
    """
    slack = NESTING_RTOL * max(1.0, abs(loglik_null))
    if loglik < loglik_null - slack:
        raise NestingViolationError(
            f"log-likelihood {loglik!r} is below the null model's {loglik_null!r}"
        )
    if loglik_null == 0:
        return 0.0
    return float(min(1.0, max(0.0, 1.0 - loglik / loglik_null)))


def _binomial_loglik(eta: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    # y*log(p) + (1-y)*log(1-p) == y*eta - log(1 + e^eta), finite for y in {0, 1}
    return float(np.sum(w * (y * eta - np.logaddexp(0.0, eta))))


def fit_null(series: BinSeries, weighting: Weighting | str) -> tuple[float, float]:
    """Intercept-only maximum likelihood fit.

    Returns:
        ``(intercept, loglik_null)``. When every bin is all-innovative or all
        recessive the intercept is infinite and the log-likelihood is 0.
    """
    if len(series) == 0:
        raise ValueError("cannot fit an empty series")
    y, w = series.response(weighting)
    p_hat = float(np.sum(w * y) / np.sum(w))
    if p_hat <= 0.0:
        return -math.inf, 0.0
    if p_hat >= 1.0:
        return math.inf, 0.0
    intercept = math.log(p_hat) - math.log1p(-p_hat)
    return intercept, _binomial_loglik(np.full(len(y), intercept), y, w)


def lr_test(fit) -> LrTest:
    """Likelihood-ratio test of ``fit`` against its intercept-only model."""
    mcfadden_r2(fit.loglik, fit.loglik_null)  # nesting check
    statistic = max(0.0, 2.0 * (fit.loglik - fit.loglik_null))
    df = fit.degree
    return LrTest(statistic, df, chi_square_sf(statistic, df))
