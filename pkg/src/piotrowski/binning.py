"""Moving-window aggregation of yearly counts into subcorpus bins."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .dataset import ChangeDataset

__all__ = [
    "DEFAULT_ANCHOR",
    "Bin",
    "BinSeries",
    "BinningError",
    "Weighting",
    "make_bins",
    "raw_yearly_bins",
    "series_from_arrays",
]

# First year covered by the corpus.
DEFAULT_ANCHOR = 1380


class BinningError(ValueError):
    pass


class Weighting(str, Enum):
    """How bins enter the likelihood.

    ``WEIGHTED`` gives each bin a prior weight equal to its number of
    attestations; ``UNWEIGHTED`` gives every bin proportion weight one.
    """

    WEIGHTED = "weighted"
    UNWEIGHTED = "unweighted"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Bin:
    start_year: int
    end_year: int
    midpoint: float
    recessive: int
    innovative: int

    @property
    def trials(self) -> int:
        return self.recessive + self.innovative

    @property
    def proportion(self) -> float:
        return self.innovative / self.trials


@dataclass(frozen=True)
class BinSeries:
    bins: tuple[Bin, ...]
    window_years: int
    overlap_years: int
    anchor_year: int

    def __len__(self):
        return len(self.bins)

    def __iter__(self):
        return iter(self.bins)

    @property
    def step(self) -> int:
        return self.window_years - self.overlap_years

    @cached_property
    def midpoints(self) -> np.ndarray:
        return np.array([b.midpoint for b in self.bins], dtype=float)

    @cached_property
    def innovative(self) -> np.ndarray:
        return np.array([b.innovative for b in self.bins], dtype=float)

    @cached_property
    def trials(self) -> np.ndarray:
        return np.array([b.trials for b in self.bins], dtype=float)

    @cached_property
    def proportions(self) -> np.ndarray:
        return self.innovative / self.trials

    def response(self, weighting: Weighting | str) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(y, w)``: bin proportions and their likelihood weights."""
        if Weighting(weighting) is Weighting.WEIGHTED:
            return self.proportions, self.trials
        return self.proportions, np.ones(len(self.bins))

    def shifted(self, years: int) -> "BinSeries":
        """Same counts with every window moved by ``years``."""
        bins = tuple(
            Bin(b.start_year + years, b.end_year + years, b.midpoint + years, b.recessive, b.innovative)
            for b in self.bins
        )
        return BinSeries(bins, self.window_years, self.overlap_years, self.anchor_year + years)

    def scaled(self, factor: int) -> "BinSeries":
        """Same windows with every count multiplied by ``factor``."""
        bins = tuple(
            Bin(b.start_year, b.end_year, b.midpoint, b.recessive * factor, b.innovative * factor)
            for b in self.bins
        )
        return BinSeries(bins, self.window_years, self.overlap_years, self.anchor_year)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("start", "end", "midpoint", "recessive", "innovative", "proportion"))
        for b in self.bins:
            writer.writerow((b.start_year, b.end_year, repr(b.midpoint), b.recessive,
                             b.innovative, f"{b.proportion:.12g}"))
        return buf.getvalue()


def make_bins(
    ds: ChangeDataset,
    window_years: int = 20,
    overlap_years: int = 10,
    anchor_year: int = DEFAULT_ANCHOR,
    stop_year: int | None = None,
) -> BinSeries:
    """Aggregate yearly counts into overlapping windows ``[start, start + window)``.

    Window starts sit on the lattice ``anchor + k * (window - overlap)``. The
    first window is the last lattice point not after the earliest year and the
    sweep ends once a start passes the latest year. Windows without any
    attestation are dropped. With ``stop_year`` set, windows reaching past it
    are dropped too (used to keep split fits from straddling the split).
    """
    window_years, overlap_years = int(window_years), int(overlap_years)
    if window_years < 1:
        raise BinningError(f"window must be at least one year, got {window_years}")
    if not 0 <= overlap_years < window_years:
        raise BinningError(
            f"overlap ({overlap_years}) must be non-negative and smaller than the window ({window_years})"
        )
    step = window_years - overlap_years
    if not ds.records:
        return BinSeries((), window_years, overlap_years, anchor_year)

    lo, hi = ds.year_range
    first = anchor_year + ((lo - anchor_year) // step) * step
    # counts indexed by year - first, padded so every window slice is in range
    size = hi - first + window_years + 1
    rec = np.zeros(size, dtype=np.int64)
    inn = np.zeros(size, dtype=np.int64)
    for r in ds.records:
        rec[r.year - first] += r.recessive
        inn[r.year - first] += r.innovative
    rec_cum = np.concatenate(([0], np.cumsum(rec)))
    inn_cum = np.concatenate(([0], np.cumsum(inn)))

    bins = []
    for start in range(first, hi + 1, step):
        end = start + window_years
        if stop_year is not None and end > stop_year:
            break
        i, j = start - first, end - first
        r = int(rec_cum[j] - rec_cum[i])
        n = int(inn_cum[j] - inn_cum[i])
        if r + n > 0:
            bins.append(Bin(start, end, start + window_years / 2, r, n))
    return BinSeries(tuple(bins), window_years, overlap_years, anchor_year)


def raw_yearly_bins(ds: ChangeDataset) -> BinSeries:
    """One bin per attested year, centred half a year in."""
    bins = tuple(
        Bin(r.year, r.year + 1, r.year + 0.5, r.recessive, r.innovative)
        for r in ds.records if r.trials > 0
    )
    anchor = ds.records[0].year if ds.records else DEFAULT_ANCHOR
    return BinSeries(bins, 1, 0, anchor)


def series_from_arrays(midpoints, recessive, innovative, window_years: int = 1) -> BinSeries:
    """Build a series directly from per-bin arrays (mainly for synthetic data)."""
    bins = []
    for m, r, n in zip(midpoints, recessive, innovative):
        if r + n <= 0:
            continue
        start = int(np.floor(m - window_years / 2))
        bins.append(Bin(start, start + window_years, float(m), int(r), int(n)))
    anchor = bins[0].start_year if bins else DEFAULT_ANCHOR
    return BinSeries(tuple(bins), window_years, 0, anchor)
