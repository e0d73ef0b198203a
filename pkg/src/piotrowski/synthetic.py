"""Synthetic attestation counts drawn from a known logit curve.

Used as ground truth in tests and to build stand-in datasets when real
corpus counts are not at hand.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .binning import BinSeries, series_from_arrays
from .dataset import ChangeDataset

__all__ = ["logistic_curve", "polynomial_logit_curve", "simulate_change", "simulate_series"]


def logistic_curve(t_half: float, rate: float) -> Callable[[np.ndarray], np.ndarray]:
    """``p(t) = 1 / (1 + exp(-rate * (t - t_half)))``."""
    def p(t):
        return 1.0 / (1.0 + np.exp(-rate * (np.asarray(t, dtype=float) - t_half)))
    return p


def polynomial_logit_curve(coeffs, center: float, scale: float) -> Callable[[np.ndarray], np.ndarray]:
    """Logit given as a polynomial in ``(t - center) / scale``, lowest power first."""
    coeffs = np.asarray(coeffs, dtype=float)

    def p(t):
        z = (np.asarray(t, dtype=float) - center) / scale
        return 1.0 / (1.0 + np.exp(-np.polyval(coeffs[::-1], z)))
    return p


def _draw_innovative(rng, trials, p, concentration):
    if concentration is None:
        return rng.binomial(trials, p)
    p = np.clip(p, 1e-9, 1 - 1e-9)
    q = rng.beta(p * concentration, (1 - p) * concentration)
    return rng.binomial(trials, q)


def simulate_series(prob, midpoints, trials, seed=0, concentration=None, window_years: int = 1) -> BinSeries:
    """Bins at ``midpoints`` with binomial (or beta-binomial) innovative counts."""
    rng = np.random.default_rng(seed)
    midpoints = np.asarray(midpoints, dtype=float)
    trials = np.broadcast_to(np.asarray(trials, dtype=np.int64), midpoints.shape)
    inn = _draw_innovative(rng, trials, prob(midpoints), concentration)
    return series_from_arrays(midpoints, trials - inn, inn, window_years)


def simulate_change(
    name: str,
    prob,
    total: int,
    first_year: int,
    last_year: int,
    n_years: int,
    seed: int = 0,
    concentration: float | None = None,
    growth: float = 0.006,
    required_years=(),
) -> ChangeDataset:
    """Draw a yearly dataset of ``total`` attestations over ``n_years`` distinct years.

    Text years are sampled uniformly inside ``[first_year, last_year]``;
    both ends and ``required_years`` are always included. Attestations are
    spread over them with weights growing like
    ``exp(growth * (year - first_year))``, mimicking the growth of written
    output. ``concentration`` adds beta-binomial
    extra-variation; ``None`` means plain binomial counts.
    """
    if n_years < 2 or n_years > last_year - first_year + 1:
        raise ValueError("n_years must fit inside the year range")
    rng = np.random.default_rng(seed)
    fixed = sorted({first_year, last_year, *required_years})
    pool = np.setdiff1d(np.arange(first_year, last_year + 1), fixed)
    inner = rng.choice(pool, size=n_years - len(fixed), replace=False)
    years = np.sort(np.concatenate((fixed, inner))).astype(np.int64)
    weights = np.exp(growth * (years - first_year)) * rng.lognormal(0.0, 0.8, size=len(years))
    trials = 1 + rng.multinomial(total - len(years), weights / weights.sum())
    inn = _draw_innovative(rng, trials, prob(years), concentration)
    counts = zip(years.tolist(), (trials - inn).tolist(), inn.tolist())
    return ChangeDataset.from_counts(name, counts)
