"""Per-change model bundles, split fits, grid search and composite view."""
from __future__ import annotations

import csv
import io
import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .binning import DEFAULT_ANCHOR, BinningError, BinSeries, Weighting, make_bins, raw_yearly_bins
from .dataset import ChangeDataset
from .glm import FitError, LogisticFit, fit_logistic

__all__ = [
    "AnalysisConfig",
    "ChangeAnalysis",
    "CompositeCurve",
    "CompositeModel",
    "GridEntry",
    "GridResult",
    "analyze_change",
    "analyze_polynomial",
    "composite",
    "default_lattice",
    "grid_search",
    "read_grid_csv",
    "split_fit",
    "thread_count",
]

log = logging.getLogger(__name__)

THREADS_ENV = "PIOTROWSKI_THREADS"


@dataclass(frozen=True)
class AnalysisConfig:
    window_years: int = 20
    overlap_years: int = 10
    anchor_year: int = DEFAULT_ANCHOR
    degree: int = 1
    weightings: tuple[Weighting, ...] = (Weighting.WEIGHTED, Weighting.UNWEIGHTED)
    include_raw_yearly: bool = True

    def bins(self, ds: ChangeDataset, **overrides) -> BinSeries:
        kw = dict(window_years=self.window_years, overlap_years=self.overlap_years,
                  anchor_year=self.anchor_year)
        kw.update(overrides)
        return make_bins(ds, **kw)


@dataclass
class ChangeAnalysis:
    """Fits of one change, keyed by label (``weighted``, ``raw_unweighted``, ``poly3_weighted``...)."""

    name: str
    series: BinSeries
    fits: dict[str, LogisticFit] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    raw_series: BinSeries | None = None

    def add(self, label: str, series: BinSeries, degree: int, weighting: Weighting) -> None:
        try:
            self.fits[label] = fit_logistic(series, degree, weighting)
        except (FitError, ArithmeticError) as exc:
            log.warning("%s: %s fit failed: %s", self.name, label, exc)
            self.failures[label] = str(exc)

    def best_polynomial(self, alpha: float = 0.05) -> LogisticFit | None:
        """Highest-R² polynomial fit that is significant at ``alpha``, else the highest-R² one."""
        polys = [f for label, f in self.fits.items() if label.startswith("poly")]
        accepted = [f for f in polys if f.p_value < alpha] or polys
        return max(accepted, key=lambda f: f.mcfadden_r2, default=None)

    def rows(self) -> list[dict]:
        return [dict(fit.as_row(self.name), label=label) for label, fit in self.fits.items()]


def _label(weighting: Weighting, degree: int, raw: bool = False) -> str:
    prefix = "raw_" if raw else (f"poly{degree}_" if degree > 1 else "")
    return prefix + weighting.value


def analyze_change(ds: ChangeDataset, cfg: AnalysisConfig = AnalysisConfig()) -> ChangeAnalysis:
    """Binned fits in each configured weighting, plus one-year fits when enabled."""
    series = cfg.bins(ds)
    analysis = ChangeAnalysis(ds.name, series)
    for weighting in cfg.weightings:
        analysis.add(_label(weighting, cfg.degree), series, cfg.degree, weighting)
    if cfg.include_raw_yearly:
        analysis.raw_series = raw_yearly_bins(ds)
        for weighting in cfg.weightings:
            analysis.add(_label(weighting, 1, raw=True), analysis.raw_series, 1, weighting)
    return analysis


def analyze_polynomial(ds: ChangeDataset, degree: int, cfg: AnalysisConfig = AnalysisConfig()) -> ChangeAnalysis:
    """:func:`analyze_change` with degree-``degree`` fits added in both weightings."""
    if degree < 2:
        raise ValueError(f"polynomial degree must be at least 2, got {degree}")
    analysis = analyze_change(ds, AnalysisConfig(
        cfg.window_years, cfg.overlap_years, cfg.anchor_year, 1, cfg.weightings, cfg.include_raw_yearly
    ))
    for weighting in cfg.weightings:
        analysis.add(_label(weighting, degree), analysis.series, degree, weighting)
    return analysis


def split_fit(ds: ChangeDataset, split_year: int,
              cfg: AnalysisConfig = AnalysisConfig()) -> tuple[ChangeAnalysis, ChangeAnalysis]:
    """Fit independent degree-1 models before and from ``split_year``.

    Windows are re-aligned on the split year in each part, so no window
    crosses it.
    """
    rng = ds.year_range
    if rng is None or not rng[0] < split_year <= rng[1]:
        raise ValueError(f"split year {split_year} is not inside the data range {rng}")
    early = ds.between(stop=split_year, name=f"{ds.name}_before_{split_year}")
    late = ds.between(start=split_year, name=f"{ds.name}_from_{split_year}")
    if not early.records:
        raise ValueError(f"no data before {split_year}")

    parts = []
    for part, anchor, stop in (
        (early, split_year - cfg.window_years, split_year),
        (late, split_year, None),
    ):
        series = make_bins(part, cfg.window_years, cfg.overlap_years, anchor, stop_year=stop)
        analysis = ChangeAnalysis(part.name, series)
        for weighting in cfg.weightings:
            analysis.add(weighting.value, series, 1, weighting)
        parts.append(analysis)
    return parts[0], parts[1]


@dataclass(frozen=True)
class GridEntry:
    window: int
    overlap: int
    r2: float
    p_value: float
    converged: bool
    n_bins: int = 0
    error: str = ""


@dataclass(frozen=True)
class GridResult:
    name: str
    weighting: Weighting
    degree: int
    entries: tuple[GridEntry, ...]

    def cell(self, window: int, overlap: int) -> GridEntry | None:
        return next((e for e in self.entries if e.window == window and e.overlap == overlap), None)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow(GRID_COLUMNS)
        for e in self.entries:
            writer.writerow((
                self.name, e.window, e.overlap, self.weighting.value, self.degree,
                "" if np.isnan(e.r2) else repr(e.r2),
                "" if np.isnan(e.p_value) else repr(e.p_value),
                str(e.converged).lower(),
            ))
        return buf.getvalue()


GRID_COLUMNS = ("change", "window", "overlap", "weighting", "degree", "r2", "p_value", "converged")


def read_grid_csv(source) -> list[GridResult]:
    """Parse grid CSV text (possibly several changes) back into results."""
    if not isinstance(source, str):
        source = source.read()
    groups: dict[tuple[str, str, int], list[GridEntry]] = {}
    for row in csv.DictReader(io.StringIO(source)):
        key = (row["change"], row["weighting"], int(row["degree"]))
        groups.setdefault(key, []).append(GridEntry(
            int(row["window"]), int(row["overlap"]),
            float(row["r2"]) if row["r2"] else float("nan"),
            float(row["p_value"]) if row["p_value"] else float("nan"),
            row["converged"].lower() == "true",
        ))
    return [GridResult(name, Weighting(wt), deg, tuple(entries))
            for (name, wt, deg), entries in groups.items()]


def default_lattice() -> tuple[list[int], list[int]]:
    """Windows and overlaps 5, 10, ..., 100 years."""
    values = list(range(5, 101, 5))
    return values, list(values)


def thread_count(threads: int | None = None) -> int:
    """Worker count from the argument or ``PIOTROWSKI_THREADS``; 0 means one per CPU."""
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "0") or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def _grid_entry(args) -> GridEntry:
    ds, window, overlap, anchor, weighting, degree = args
    try:
        series = make_bins(ds, window, overlap, anchor)
        fit = fit_logistic(series, degree, weighting)
    except (FitError, BinningError, ArithmeticError) as exc:
        return GridEntry(window, overlap, float("nan"), float("nan"), False, 0, str(exc))
    return GridEntry(window, overlap, fit.mcfadden_r2, fit.p_value, fit.converged, fit.n_bins)


def grid_search(
    ds: ChangeDataset,
    windows=None,
    overlaps=None,
    weighting: Weighting | str = Weighting.UNWEIGHTED,
    degree: int = 1,
    anchor_year: int = DEFAULT_ANCHOR,
    threads: int | None = None,
) -> GridResult:
    """Fit every ``(window, overlap)`` pair with ``overlap < window``.

    Entries come back sorted by window then overlap whatever the worker
    count; a failed fit is recorded in its entry instead of stopping the sweep.
    """
    default_windows, default_overlaps = default_lattice()
    windows = sorted(set(default_windows if windows is None else windows))
    overlaps = sorted(set(default_overlaps if overlaps is None else overlaps))
    weighting = Weighting(weighting)
    tasks = [(ds, w, o, anchor_year, weighting, degree)
             for w, o in itertools.product(windows, overlaps) if 0 <= o < w]
    workers = min(thread_count(threads), max(1, len(tasks)))
    if workers == 1:
        entries = [_grid_entry(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_grid_entry, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return GridResult(ds.name, weighting, degree, tuple(entries))


@dataclass(frozen=True)
class CompositeCurve:
    name: str
    label: str
    degree: int
    years: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)
    t_half: float | None = None


@dataclass(frozen=True)
class CompositeModel:
    years: np.ndarray = field(repr=False)
    curves: tuple[CompositeCurve, ...]
    offsets: dict[tuple[str, str], float]

    def offset(self, a: str, b: str) -> float:
        """Years from the 1:1 crossing of ``a`` to that of ``b``."""
        return self.offsets[(a, b)]


def composite(analyses: list[ChangeAnalysis], label: str = "weighted") -> CompositeModel:
    """Put one fitted curve per change on a shared yearly axis.

    Each change contributes its ``label`` fit when it is degree 1, otherwise
    its best polynomial fit; only degree-1 curves get crossing offsets.
    """
    if len(analyses) < 2:
        raise ValueError("a composite needs at least two analyses")
    starts = [a.series.bins[0].start_year for a in analyses if len(a.series)]
    ends = [a.series.bins[-1].end_year for a in analyses if len(a.series)]
    if not starts:
        raise ValueError("no binned data in any analysis")
    years = np.arange(min(starts), max(ends) + 1, dtype=float)

    curves = []
    for a in analyses:
        fit = a.fits.get(label)
        chosen = label
        if fit is None or fit.degree != 1:
            fit = a.best_polynomial() or fit
            chosen = next((k for k, v in a.fits.items() if v is fit), label)
        if fit is None:
            log.warning("%s: no usable fit for the composite", a.name)
            continue
        curves.append(CompositeCurve(a.name, chosen, fit.degree, years, fit.predict(years), fit.t_half))

    names = [c.name for c in curves]
    if len(set(names)) != len(names):
        # keep offsets addressable when the same change appears twice
        curves = [CompositeCurve(f"{c.name}#{i}", c.label, c.degree, c.years, c.probabilities, c.t_half)
                  for i, c in enumerate(curves)]
    offsets = {
        (a.name, b.name): b.t_half - a.t_half
        for a, b in itertools.permutations(curves, 2)
        if a.t_half is not None and b.t_half is not None
    }
    return CompositeModel(years, tuple(curves), offsets)
