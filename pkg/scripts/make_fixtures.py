"""Regenerate the synthetic stand-in datasets and their frozen oracle values.

    python scripts/make_fixtures.py

Writes ``tests/data/<change>.csv`` and ``tests/data/expected.json``. The
expected values come from an independent route: windows are summed by brute
force here, and models are fitted with statsmodels' binomial GLM. They never
go through the package's own binning or IRLS code.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import statsmodels.api as sm
from scipy import stats

from piotrowski.dataset import ChangeDataset, merge_datasets, write_yearly_counts
from piotrowski.synthetic import logistic_curve, polynomial_logit_curve, simulate_change

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
ANCHOR = 1380


def wietszy():
    ds = simulate_change("wietszy_wiekszy", logistic_curve(1678.3, 0.049), 9158, 1392, 1825, 202,
                         seed=11, concentration=150, required_years=(1543, 1746))
    counts = []
    for r in ds.records:
        rec, inn = r.recessive, r.innovative
        if r.year < 1543:
            rec, inn = rec + inn, 0
        elif r.year == 1543 and inn == 0:
            rec, inn = rec - 1, 1
        if 1746 < r.year < 1825:
            rec, inn = 0, rec + inn
        elif r.year == 1825 and rec == 0:
            rec, inn = 1, inn - 1
        counts.append((r.year, rec, inn))
    return ChangeDataset.from_counts(ds.name, counts)


def barzo():
    # before 1600: 2,213 recessive and 25 innovative attestations
    prob = logistic_curve(1755, 0.03)
    late = simulate_change("barzo_bardzo", prob, 17938 - 2238, 1600, 1845, 160, seed=12, concentration=80)
    rng = np.random.default_rng(120)
    years = np.sort(rng.choice(np.arange(1402, 1600), size=70, replace=False))
    trials = 1 + rng.multinomial(2238 - len(years), np.exp(0.01 * (years - 1400)) / np.exp(0.01 * (years - 1400)).sum())
    inn = rng.multinomial(25, trials * prob(years) / np.sum(trials * prob(years)))
    inn = np.minimum(inn, trials)
    inn[np.argmax(trials)] += 25 - inn.sum()
    early = [(int(y), int(n - i), int(i)) for y, n, i in zip(years, trials, inn)]
    return ChangeDataset.from_counts("barzo_bardzo", early + [(r.year, r.recessive, r.innovative) for r in late])


CHANGES = {
    "bych_bym": lambda: simulate_change("bych_bym", logistic_curve(1555, 0.07), 7491, 1400, 1700, 150,
                                        seed=13, concentration=200),
    "bychmy_bysmy": lambda: simulate_change("bychmy_bysmy", logistic_curve(1585, 0.045), 2585, 1420, 1720, 120,
                                            seed=14, concentration=40),
    "na_naj": lambda: simulate_change("na_naj", logistic_curve(1600, 0.02), 8832, 1420, 1800, 180,
                                      seed=15, concentration=60),
    "ir_er": lambda: simulate_change("ir_er", logistic_curve(1440, 0.03), 49829, 1385, 1845, 240,
                                     seed=16, concentration=30),
    "inszy_inny": lambda: simulate_change(
        "inszy_inny", polynomial_logit_curve((0.3, 2.2, 0.4, -0.5), 1600, 120), 25103, 1390, 1845, 220,
        seed=17, concentration=40),
    "wszytek_wszystek": lambda: simulate_change(
        "wszytek_wszystek", polynomial_logit_curve((-0.4, 1.2, 0.6, 0.3), 1600, 120), 55005, 1385, 1845, 260,
        seed=18, concentration=8),
    "abo_albo": lambda: simulate_change(
        "abo_albo", polynomial_logit_curve((1.2, 0.8, -2.4, 0.2, 0.3), 1600, 120), 44743, 1385, 1845, 250,
        seed=19, concentration=40),
}


# --- independent oracle ---------------------------------------------------

def brute_bins(ds, window, overlap, anchor, stop=None):
    step = window - overlap
    lo, hi = ds.years[0], ds.years[-1]
    start = anchor
    while start > lo:
        start -= step
    while start + step <= lo:
        start += step
    out = []
    while start <= hi:
        end = start + window
        if stop is not None and end > stop:
            break
        rec = sum(r.recessive for r in ds.records if start <= r.year < end)
        inn = sum(r.innovative for r in ds.records if start <= r.year < end)
        if rec + inn:
            out.append((start + window / 2, rec, inn))
        start += step
    return out


def oracle_fit(bins, degree, weighted):
    mid = np.array([b[0] for b in bins])
    n = np.array([b[1] + b[2] for b in bins], dtype=float)
    y = np.array([b[2] for b in bins]) / n
    z = (mid - mid.mean()) / mid.std(ddof=1)
    X = np.vander(z, degree + 1, increasing=True)
    w = n if weighted else np.ones_like(n)
    res = sm.GLM(y, X, family=sm.families.Binomial(), var_weights=w).fit(tol=1e-13, maxiter=200)
    mu = np.clip(res.fittedvalues, 1e-300, 1 - 1e-16)
    ll = float(np.sum(w * (y * np.log(mu) + (1 - y) * np.log1p(-mu))))
    p0 = np.sum(w * y) / np.sum(w)
    ll0 = float(np.sum(w * (y * np.log(p0) + (1 - y) * np.log1p(-p0))))
    stat = 2 * (ll - ll0)
    return {
        "r2": 1 - ll / ll0,
        "p_value": float(stats.chi2.sf(stat, degree)),
        "df": len(bins) - degree - 1,
        "n_bins": len(bins),
    }


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    datasets = {"wietszy_wiekszy": wietszy(), "barzo_bardzo": barzo()}
    datasets.update({name: make() for name, make in CHANGES.items()})
    for name, ds in datasets.items():
        (DATA / f"{name}.csv").write_text(write_yearly_counts(ds), encoding="utf-8")
    merged = merge_datasets(datasets["bych_bym"], datasets["bychmy_bysmy"], "bych_merged")

    expected = {"headline": {}, "grid": {}, "polynomial": {}, "split": {}, "raw": {}}
    headline = dict(datasets, bych_merged=merged)
    for name, ds in headline.items():
        bins = brute_bins(ds, 20, 10, ANCHOR)
        expected["headline"][name] = {
            "weighted": oracle_fit(bins, 1, True),
            "unweighted": oracle_fit(bins, 1, False),
        }
    raw = [(r.year + 0.5, r.recessive, r.innovative) for r in datasets["wietszy_wiekszy"].records if r.trials]
    expected["raw"]["wietszy_wiekszy"] = {"weighted": oracle_fit(raw, 1, True)}

    grid_changes = ["wietszy_wiekszy", "bych_merged", "barzo_bardzo", "na_naj", "inszy_inny",
                    "wszytek_wszystek", "ir_er"]
    for name in grid_changes:
        expected["grid"][name] = {
            f"{w},{o}": oracle_fit(brute_bins(headline[name], w, o, ANCHOR), 1, False)
            for w, o in ((50, 20), (20, 5))
        }

    for name, degree in (("inszy_inny", 3), ("wszytek_wszystek", 3), ("wszytek_wszystek", 4), ("abo_albo", 6)):
        bins = brute_bins(datasets[name], 20, 10, ANCHOR)
        expected["polynomial"][f"{name}:{degree}"] = {
            "weighted": oracle_fit(bins, degree, True),
            "unweighted": oracle_fit(bins, degree, False),
        }

    abo = datasets["abo_albo"]
    early = ChangeDataset("early", tuple(r for r in abo.records if r.year < 1610))
    late = ChangeDataset("late", tuple(r for r in abo.records if r.year >= 1610))
    expected["split"]["abo_albo:1610"] = {
        "before": oracle_fit(brute_bins(early, 20, 10, 1610 - 20, stop=1610), 1, True),
        "from": oracle_fit(brute_bins(late, 20, 10, 1610), 1, True),
    }

    (DATA / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    for section, values in expected.items():
        for name, v in values.items():
            print(section, name, json.dumps(v)[:300])


if __name__ == "__main__":
    main()
