"""Independent reference computations used by the tests.

Nothing here imports the package's fitting or binning code.
"""
import math

import numpy as np


def naive_loglik(beta, rows, y, w):
    total = 0.0
    for x, yi, wi in zip(rows, y, w):
        eta = sum(b * xi for b, xi in zip(beta, x))
        p = 1.0 / (1.0 + math.exp(-eta))
        term = 0.0
        if yi > 0:
            term += yi * math.log(p)
        if yi < 1:
            term += (1 - yi) * math.log(1 - p)
        total += wi * term
    return total


def central_difference(f, beta, h=1e-5):
    beta = np.asarray(beta, dtype=float)
    grad = np.empty_like(beta)
    for k in range(len(beta)):
        e = np.zeros_like(beta)
        e[k] = h
        grad[k] = (f(beta + e) - f(beta - e)) / (2 * h)
    return grad


def standardized_rows(midpoints, degree):
    x = np.asarray(midpoints, dtype=float)
    mean = sum(x) / len(x)
    sd = math.sqrt(sum((v - mean) ** 2 for v in x) / (len(x) - 1))
    return np.array([[((v - mean) / sd) ** k for k in range(degree + 1)] for v in x])


def _vector_loglik(b0, b1, z, y, w):
    eta = b0[..., None] + b1[..., None] * z
    return np.sum(w * (y * eta - np.logaddexp(0.0, eta)), axis=-1)


def grid_newton_max(z, y, w, span=12.0, points=241, newton_steps=60):
    """Dense 2-D grid search over (intercept, slope), then plain Newton from the best node."""
    z, y, w = (np.asarray(a, dtype=float) for a in (z, y, w))
    axis = np.linspace(-span, span, points)
    b0, b1 = np.meshgrid(axis, axis, indexing="ij")
    ll = _vector_loglik(b0, b1, z, y, w)
    i, j = np.unravel_index(np.argmax(ll), ll.shape)
    beta = np.array([axis[i], axis[j]])
    for _ in range(newton_steps):
        eta = beta[0] + beta[1] * z
        p = 1 / (1 + np.exp(-eta))
        r = w * (y - p)
        g = np.array([r.sum(), (r * z).sum()])
        v = w * p * (1 - p)
        H = np.array([[v.sum(), (v * z).sum()], [(v * z).sum(), (v * z * z).sum()]])
        step = np.linalg.solve(H, g)
        beta = beta + step
        if np.max(np.abs(step)) < 1e-13:
            break
    return float(_vector_loglik(np.array(beta[0]), np.array(beta[1]), z, y, w)), beta


def zoom_grid_max(f, lo=-30.0, hi=30.0, points=201, width=1e-11):
    """Maximize a 1-D unimodal function by repeatedly refining a uniform grid."""
    while hi - lo > width:
        xs = np.linspace(lo, hi, points)
        vals = [f(x) for x in xs]
        k = int(np.argmax(vals))
        lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, points - 1)]
    x = (lo + hi) / 2
    return x, f(x)


def chi2_sf_closed_form(x, df):
    """Closed forms: erfc for df = 1, finite Poisson sum for even df."""
    if df == 1:
        return math.erfc(math.sqrt(x / 2))
    if df % 2 == 0:
        half = x / 2
        return math.exp(-half) * sum(half**k / math.factorial(k) for k in range(df // 2))
    raise ValueError("closed form only for df = 1 or even df")


def brute_force_bins(records, window, overlap, anchor):
    """Window sums by explicit membership tests; records are (year, rec, inn)."""
    step = window - overlap
    years = [r[0] for r in records]
    lo, hi = min(years), max(years)
    start = anchor
    while start > lo:
        start -= step
    while start + step <= lo:
        start += step
    out = []
    while start <= hi:
        rec = sum(r[1] for r in records if start <= r[0] < start + window)
        inn = sum(r[2] for r in records if start <= r[0] < start + window)
        if rec + inn:
            out.append((start, start + window, rec, inn))
        start += step
    return out
