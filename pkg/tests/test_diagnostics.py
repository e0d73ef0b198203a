import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, stats

from oracles import chi2_sf_closed_form, zoom_grid_max
from piotrowski.binning import series_from_arrays
from piotrowski.diagnostics import (
    NestingViolationError,
    chi_square_sf,
    fit_null,
    lr_test,
    mcfadden_r2,
    regularized_gamma_q,
)
from piotrowski.glm import fit_logistic


@pytest.mark.parametrize("df", [1, 2, 4, 6, 10, 40])
@pytest.mark.parametrize("x", [0.0, 1e-6, 0.5, 3.841459, 10.0, 55.0, 300.0])
def test_chi_square_sf_closed_forms(x, df):
    if df == 1 or df % 2 == 0:
        assert chi_square_sf(x, df) == pytest.approx(chi2_sf_closed_form(x, df), rel=1e-10, abs=1e-300)
    assert chi_square_sf(x, df) == pytest.approx(stats.chi2.sf(x, df), rel=1e-9, abs=1e-300)


@given(st.floats(0, 400), st.integers(1, 60))
@settings(max_examples=200)
def test_chi_square_sf_against_scipy(x, df):
    assert chi_square_sf(x, df) == pytest.approx(stats.chi2.sf(x, df), rel=1e-8, abs=1e-290)


def test_five_percent_point():
    assert chi_square_sf(3.841459, 1) == pytest.approx(0.05, abs=1e-6)


def test_chi_square_sf_monotone():
    xs = np.linspace(0, 80, 400)
    for df in (1, 3, 8):
        vals = [chi_square_sf(x, df) for x in xs]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert vals[0] == 1.0


def test_gamma_argument_checks():
    with pytest.raises(ValueError):
        regularized_gamma_q(0, 1)
    with pytest.raises(ValueError):
        chi_square_sf(-1, 1)
    with pytest.raises(ValueError):
        chi_square_sf(1, 0)
    assert regularized_gamma_q(2.5, math.inf) == 0.0


def test_mcfadden_examples():
    assert mcfadden_r2(-50.0, -100.0) == 0.5
    assert mcfadden_r2(-100.0, -100.0) == 0.0
    assert mcfadden_r2(0.0, -100.0) == 1.0
    assert mcfadden_r2(0.0, 0.0) == 0.0
    with pytest.raises(NestingViolationError):
        mcfadden_r2(-101.0, -100.0)


@given(st.floats(1e-3, 1e6), st.floats(0, 1))
def test_mcfadden_in_unit_interval(scale, frac):
    ll0 = -scale
    assert 0.0 <= mcfadden_r2(ll0 * frac, ll0) <= 1.0


def test_fit_null_even_split():
    s = series_from_arrays([1600, 1610], [5, 5], [5, 5])
    intercept, ll0 = fit_null(s, "weighted")
    assert intercept == 0.0
    assert ll0 == pytest.approx(20 * math.log(0.5))


def test_fit_null_ninety_percent():
    s = series_from_arrays([1600, 1610], [1, 0], [4, 5])
    intercept, ll0 = fit_null(s, "weighted")
    assert intercept == pytest.approx(math.log(9))
    assert ll0 == pytest.approx(9 * math.log(0.9) + math.log(0.1))


def test_fit_null_one_form_only():
    s = series_from_arrays([1600, 1610], [0, 0], [3, 5])
    assert fit_null(s, "unweighted") == (math.inf, 0.0)


@pytest.mark.parametrize("weighting", ["weighted", "unweighted"])
def test_fit_null_against_grid_oracle(rng, weighting):
    for _ in range(5):
        trials = rng.integers(1, 80, size=12)
        inn = rng.binomial(trials, rng.uniform(0.1, 0.9))
        s = series_from_arrays(np.arange(1500, 1620, 10), trials - inn, inn)
        y, w = s.response(weighting)

        def ll(b):
            p = 1 / (1 + math.exp(-b))
            return float(np.sum(w * (y * math.log(p) + (1 - y) * math.log(1 - p))))

        # the maximum value is well resolved by a grid, the argmax only to ~sqrt(eps)
        _, ll_star = zoom_grid_max(ll)
        root = optimize.brentq(lambda b: float(np.sum(w * (y - 1 / (1 + math.exp(-b))))), -30, 30, xtol=1e-14)
        intercept, ll0 = fit_null(s, weighting)
        assert ll0 == pytest.approx(ll_star, abs=1e-8)
        assert intercept == pytest.approx(root, abs=1e-10)


def test_lr_test_matches_fit(rng):
    trials = rng.integers(20, 80, size=15)
    mid = np.arange(1500, 1650, 10)
    inn = rng.binomial(trials, 1 / (1 + np.exp(-(mid - 1570) / 20)))
    fit = fit_logistic(series_from_arrays(mid, trials - inn, inn), 2, "weighted")
    test = lr_test(fit)
    assert test.df == 2
    assert test.statistic == pytest.approx(2 * (fit.loglik - fit.loglik_null))
    assert test.p_value == pytest.approx(stats.chi2.sf(test.statistic, 2), rel=1e-9, abs=1e-300)
    assert fit.p_value == test.p_value


def test_null_p_values_roughly_uniform():
    rng = np.random.default_rng(7)
    mid = np.arange(1500, 1700, 10)
    p_values = []
    for _ in range(300):
        trials = rng.integers(10, 60, size=len(mid))
        inn = rng.binomial(trials, 0.4)
        p_values.append(fit_logistic(series_from_arrays(mid, trials - inn, inn), 1, "weighted").p_value)
    rate = np.mean(np.array(p_values) < 0.05)
    assert 0.02 <= rate <= 0.09
    assert stats.kstest(p_values, "uniform").pvalue > 1e-3
