"""Binomial logit regression on binned proportions, fitted by IRLS.

The predictor (bin midpoint in calendar years) is centred and scaled before
polynomial features are built; raw calendar-year powers of degree 6 are far
too ill-conditioned to solve directly. Coefficients are reported on both the
standardized and the raw-year scale.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_consistent_length, check_is_fitted

from .binning import BinSeries, Weighting
from .diagnostics import _binomial_loglik, chi_square_sf, fit_null, mcfadden_r2

__all__ = [
    "DegenerateAbscissaError",
    "DesignSpec",
    "FitError",
    "LogisticCurve",
    "LogisticFit",
    "PiotrowskiParams",
    "SingularDesignError",
    "UnderdeterminedModelError",
    "build_design",
    "destandardize",
    "fit_logistic",
    "fits_to_csv",
    "log_likelihood",
    "loglik_gradient",
    "predict",
    "to_piotrowski",
]

MAX_ITER = 100
MAX_HALVINGS = 30
LOGLIK_TOL = 1e-10
BETA_TOL = 1e-8
SEPARATION_BOUND = 30.0


class FitError(ValueError):
    """A model cannot be fitted to the given bins."""


class UnderdeterminedModelError(FitError):
    pass


class DegenerateAbscissaError(FitError):
    pass


class SingularDesignError(FitError):
    pass


def expit(eta):
    """Logistic function, stable for large ``|eta|``."""
    eta = np.asarray(eta, dtype=float)
    e = np.exp(-np.abs(eta))
    return np.where(eta >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _features(x, degree: int, center: float, scale: float) -> np.ndarray:
    z = (np.asarray(x, dtype=float) - center) / scale
    return np.vander(z, degree + 1, increasing=True)


@dataclass(frozen=True)
class DesignSpec:
    degree: int
    center: float
    scale: float
    rows: np.ndarray = field(repr=False, compare=False)

    def features(self, x) -> np.ndarray:
        return _features(np.atleast_1d(x), self.degree, self.center, self.scale)


def _standardization(x: np.ndarray) -> tuple[float, float]:
    center = float(np.mean(x))
    scale = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
    return center, scale


def build_design(series: BinSeries, degree: int) -> DesignSpec:
    """Standardized polynomial features ``(1, z, ..., z^degree)`` for each bin.

    ``z`` is the midpoint centred on the mean and divided by the sample
    standard deviation of the midpoints.
    """
    if degree < 1:
        raise ValueError(f"degree must be at least 1, got {degree}")
    if len(series) < degree + 2:
        raise UnderdeterminedModelError(
            f"degree-{degree} model needs at least {degree + 2} bins, got {len(series)}"
        )
    x = series.midpoints
    center, scale = _standardization(x)
    if not scale > 0:
        raise DegenerateAbscissaError("all bin midpoints coincide")
    return DesignSpec(degree, center, scale, _features(x, degree, center, scale))


def log_likelihood(beta_std, design: DesignSpec, series: BinSeries, weighting: Weighting | str) -> float:
    """Binomial log-likelihood ``sum w * (y log p + (1 - y) log(1 - p))``."""
    y, w = series.response(weighting)
    return _binomial_loglik(design.rows @ np.asarray(beta_std, dtype=float), y, w)


def loglik_gradient(beta_std, design: DesignSpec, series: BinSeries, weighting: Weighting | str) -> np.ndarray:
    y, w = series.response(weighting)
    p = expit(design.rows @ np.asarray(beta_std, dtype=float))
    return design.rows.T @ (w * (y - p))


def destandardize(coeffs_std, design_or_center, scale: float | None = None) -> np.ndarray:
    """Re-express ``sum b_k z^k`` with ``z = (t - c) / s`` as ``sum beta_j t^j``.

    Accepts either a :class:`DesignSpec` or an explicit ``(center, scale)``.
    """
    if isinstance(design_or_center, DesignSpec):
        center, scale = design_or_center.center, design_or_center.scale
    else:
        center = float(design_or_center)
    b = [float(v) for v in coeffs_std]
    raw = [0.0] * len(b)
    for k, bk in enumerate(b):
        factor = bk / scale**k
        for j in range(k + 1):
            raw[j] += factor * math.comb(k, j) * (-center) ** (k - j)
    return np.array(raw)


def _saturated_loglik(y: np.ndarray, w: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(y > 0, y * np.log(y), 0.0) + np.where(y < 1, (1 - y) * np.log1p(-y), 0.0)
    return float(np.sum(w * ent))


@dataclass
class _IrlsResult:
    beta: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    separation: bool


def _irls(X, y, w, beta0, max_iter=MAX_ITER, max_halvings=MAX_HALVINGS) -> _IrlsResult:
    beta = np.array(beta0, dtype=float)
    ll = _binomial_loglik(X @ beta, y, w)
    ll_sat = _saturated_loglik(y, w)
    converged = separation = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(X @ beta)
        grad = X.T @ (w * (y - p))
        hess = X.T @ ((w * p * (1 - p))[:, None] * X)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break

        full_step = np.max(np.abs(step))
        for _ in range(max_halvings + 1):
            candidate = beta + step
            ll_new = _binomial_loglik(X @ candidate, y, w)
            if ll_new >= ll:
                break
            step = step / 2
        else:
            # no ascent along the Newton direction; round-off at the optimum
            converged = bool(full_step < 1e-6)
            break

        growing = np.max(np.abs(candidate)) > np.max(np.abs(beta)) + BETA_TOL
        d_ll = ll_new - ll
        d_beta = np.max(np.abs(candidate - beta))
        beta, ll = candidate, ll_new
        if np.max(np.abs(beta)) > SEPARATION_BOUND or (ll_sat - ll < 1e-8 and growing):
            separation = True
        if abs(d_ll) < LOGLIK_TOL * max(1.0, abs(ll)) and d_beta < BETA_TOL:
            converged = True
            break
    return _IrlsResult(beta, ll, it, converged, separation)


def _as_years(X) -> np.ndarray:
    X = np.asarray(X, dtype=float) if not hasattr(X, "iloc") else X
    if np.ndim(X) == 1:
        X = np.reshape(X, (-1, 1))
    X = check_array(X, dtype=float)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single predictor column (years), got {X.shape[1]}")
    return X[:, 0]


class LogisticCurve(BaseEstimator):
    """Polynomial logit model for the share of the innovative form over time.

    ``X`` holds one column of years (bin midpoints) and ``y`` the observed
    proportion of the innovative form in each bin. Pass the bin sizes as
    ``sample_weight`` for the prior-weighted model; leave it out to weight
    every bin equally.

    Parameters
    ----------
    degree : int, default=1
        Degree of the polynomial in (standardized) time. Degree 1 is the
        classic S-curve.
    max_iter : int, default=100
        IRLS iteration cap.
    max_halvings : int, default=30
        Step halvings allowed per iteration when a Newton step lowers the
        likelihood.

    Attributes
    ----------
    coef_ : ndarray of shape (degree + 1,)
        Coefficients in raw calendar-year powers, intercept first.
    coef_std_ : ndarray of shape (degree + 1,)
        Coefficients on the standardized time scale.
    center_, scale_ : float
        Mean and sample standard deviation of the training years.
    loglik_, loglik_null_ : float
        Maximized and intercept-only log-likelihood.
    n_iter_ : int
    converged_ : bool
    separation_ : bool
        Set when the coefficients run off towards infinity.
    """

    def __init__(self, degree=1, max_iter=MAX_ITER, max_halvings=MAX_HALVINGS):
        self.degree = degree
        self.max_iter = max_iter
        self.max_halvings = max_halvings

    def fit(self, X, y, sample_weight=None):
        x = _as_years(X)
        y = check_array(np.asarray(y, dtype=float).reshape(-1, 1), dtype=float)[:, 0]
        check_consistent_length(x, y)
        if np.any((y < 0) | (y > 1)):
            raise ValueError("y must hold proportions in [0, 1]")
        if sample_weight is None:
            w = np.ones_like(y)
        else:
            w = check_array(np.asarray(sample_weight, dtype=float).reshape(-1, 1), dtype=float)[:, 0]
            check_consistent_length(x, w)
            if np.any(w < 0):
                raise ValueError("sample_weight must be non-negative")

        d = int(self.degree)
        if d < 1:
            raise ValueError(f"degree must be at least 1, got {self.degree}")
        if len(x) < d + 2:
            raise UnderdeterminedModelError(f"degree-{d} model needs at least {d + 2} points, got {len(x)}")
        center, scale = _standardization(x)
        if not scale > 0:
            raise DegenerateAbscissaError("all years coincide")
        X_std = _features(x, d, center, scale)
        if np.linalg.matrix_rank(X_std) < d + 1:
            raise SingularDesignError(f"degree-{d} design has rank below {d + 1}")

        p_hat = float(np.sum(w * y) / np.sum(w))
        beta0 = np.zeros(d + 1)
        if 0 < p_hat < 1:
            beta0[0] = math.log(p_hat) - math.log1p(-p_hat)
            self.loglik_null_ = _binomial_loglik(np.full(len(y), beta0[0]), y, w)
        else:
            beta0[0] = math.copysign(SEPARATION_BOUND, p_hat - 0.5)
            self.loglik_null_ = 0.0

        res = _irls(X_std, y, w, beta0, self.max_iter, self.max_halvings)
        self.coef_std_ = res.beta
        self.coef_ = destandardize(res.beta, center, scale)
        self.center_, self.scale_ = center, scale
        self.loglik_ = res.loglik
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.separation_ = res.separation or not 0 < p_hat < 1
        self.n_features_in_ = 1
        return self

    def decision_function(self, X):
        """Linear predictor (log-odds of the innovative form)."""
        check_is_fitted(self, "coef_std_")
        return _features(_as_years(X), len(self.coef_std_) - 1, self.center_, self.scale_) @ self.coef_std_

    def predict(self, X):
        """Probability of meeting the innovative form at each year."""
        return expit(self.decision_function(X))

    def predict_proba(self, X):
        p = self.predict(X)
        return np.column_stack([1 - p, p])

    def score(self, X, y, sample_weight=None):
        """McFadden pseudo-R² of the fitted curve on ``(X, y)``."""
        y = np.asarray(y, dtype=float)
        w = np.ones_like(y) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        ll = _binomial_loglik(self.decision_function(X), y, w)
        p_hat = float(np.sum(w * y) / np.sum(w))
        if not 0 < p_hat < 1:
            return 0.0
        ll0 = _binomial_loglik(np.full(len(y), math.log(p_hat / (1 - p_hat))), y, w)
        return 1.0 - ll / ll0


@dataclass(frozen=True)
class LogisticFit:
    """A fitted curve for one bin series plus its diagnostics."""

    degree: int
    weighting: Weighting
    coeffs_std: tuple[float, ...]
    coeffs_raw: tuple[float, ...]
    center: float
    scale: float
    loglik: float
    loglik_null: float
    mcfadden_r2: float
    lr_statistic: float
    p_value: float
    df_residual: int
    n_bins: int
    iterations: int
    converged: bool
    separation: bool
    window: int = 0
    overlap: int = 0

    @classmethod
    def from_coefficients(cls, coeffs_raw, weighting: Weighting | str = Weighting.WEIGHTED) -> "LogisticFit":
        """A curve given directly by raw-year coefficients, with no data behind it."""
        coeffs = tuple(float(c) for c in coeffs_raw)
        return cls(
            degree=len(coeffs) - 1, weighting=Weighting(weighting), coeffs_std=coeffs, coeffs_raw=coeffs,
            center=0.0, scale=1.0, loglik=0.0, loglik_null=0.0, mcfadden_r2=0.0, lr_statistic=0.0,
            p_value=1.0, df_residual=0, n_bins=0, iterations=0, converged=True, separation=False,
        )

    def linear_predictor(self, years) -> np.ndarray:
        return _features(np.atleast_1d(years), self.degree, self.center, self.scale) @ np.array(self.coeffs_std)

    def predict(self, years) -> np.ndarray:
        return expit(self.linear_predictor(years))

    @property
    def t_half(self) -> float | None:
        """Year of the 1:1 crossing (degree-1 fits only)."""
        if self.degree != 1 or self.coeffs_raw[1] == 0:
            return None
        return -self.coeffs_raw[0] / self.coeffs_raw[1]

    def as_row(self, change: str = "") -> dict:
        row = {
            "change": change,
            "degree": self.degree,
            "weighting": str(self.weighting),
            "window": self.window,
            "overlap": self.overlap,
        }
        for j, b in enumerate(self.coeffs_raw):
            row[f"beta{j}"] = b
        row.update(
            loglik=self.loglik,
            loglik_null=self.loglik_null,
            r2=self.mcfadden_r2,
            p_value=self.p_value,
            df=self.df_residual,
            converged=self.converged,
            separation=self.separation,
        )
        return row


def fit_logistic(series: BinSeries, degree: int = 1, weighting: Weighting | str = Weighting.WEIGHTED,
                 **kwargs) -> LogisticFit:
    """Fit a degree-``degree`` logit polynomial to ``series``.

    Non-convergence and separation are reported through the ``converged``
    and ``separation`` flags rather than raised.

    Raises:
        UnderdeterminedModelError: fewer than ``degree + 2`` bins.
        DegenerateAbscissaError: all midpoints equal.
        SingularDesignError: polynomial features are rank deficient.
    """
    weighting = Weighting(weighting)
    build_design(series, degree)
    y, w = series.response(weighting)
    est = LogisticCurve(degree=degree, **kwargs).fit(
        series.midpoints, y, sample_weight=w if weighting is Weighting.WEIGHTED else None
    )
    _, ll0 = fit_null(series, weighting)
    ll = est.loglik_
    if ll0 == 0.0:
        # one form only: the null model is already saturated
        r2, stat = 0.0, 0.0
    else:
        r2 = mcfadden_r2(ll, ll0)
        stat = max(0.0, 2.0 * (ll - ll0))
    return LogisticFit(
        degree=degree,
        weighting=weighting,
        coeffs_std=tuple(float(v) for v in est.coef_std_),
        coeffs_raw=tuple(float(v) for v in est.coef_),
        center=est.center_,
        scale=est.scale_,
        loglik=ll,
        loglik_null=ll0,
        mcfadden_r2=r2,
        lr_statistic=stat,
        p_value=chi_square_sf(stat, degree),
        df_residual=len(series) - (degree + 1),
        n_bins=len(series),
        iterations=est.n_iter_,
        converged=est.converged_,
        separation=est.separation_,
        window=series.window_years,
        overlap=series.overlap_years,
    )


def predict(fit: LogisticFit, year) -> np.ndarray | float:
    p = fit.predict(year)
    return float(p[0]) if np.ndim(year) == 0 else p


@dataclass(frozen=True)
class PiotrowskiParams:
    """Parameters of ``p(t) = 1 / (1 + a * exp(-r * t))``.

    ``a`` refers to ``t`` in calendar years; with ``t`` counted from
    ``t_half`` the shift parameter is exactly 1.
    """

    a: float
    r: float
    t_half: float

    def relative(self) -> "PiotrowskiParams":
        return PiotrowskiParams(1.0, self.r, self.t_half)

    def __call__(self, t, relative: bool = False):
        a = 1.0 if relative else self.a
        return 1.0 / (1.0 + a * np.exp(-self.r * np.asarray(t, dtype=float)))


def to_piotrowski(fit: LogisticFit) -> PiotrowskiParams:
    if fit.degree != 1:
        raise ValueError(f"only degree-1 fits map onto the Piotrowski curve, got degree {fit.degree}")
    b0, b1 = fit.coeffs_raw
    t_half = -b0 / b1 if b1 != 0 else math.nan
    return PiotrowskiParams(math.exp(-b0), b1, t_half)


FIT_COLUMNS_HEAD = ("change", "degree", "weighting", "window", "overlap")
FIT_COLUMNS_TAIL = ("loglik", "loglik_null", "r2", "p_value", "df", "converged", "separation")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def fits_to_csv(rows: list[dict]) -> str:
    """Serialize ``LogisticFit.as_row`` records; beta columns cover the highest degree present."""
    width = max((r["degree"] for r in rows), default=1) + 1
    header = [*FIT_COLUMNS_HEAD, *(f"beta{j}" for j in range(width)), *FIT_COLUMNS_TAIL]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_fmt(r[c]) if c in r else "" for c in header])
    return buf.getvalue()
