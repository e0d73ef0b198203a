"""Attestation-count datasets for a single language change.

Two CSV layouts are accepted:

* yearly: ``year,recessive,innovative``
* per text: ``text_id,year_from,year_to,recessive,innovative``

Lines starting with ``#`` are comments. Rows sharing a year are summed.
"""
from __future__ import annotations

import csv
import io
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, TextIO

__all__ = [
    "ChangeDataset",
    "DatasetError",
    "DegenerateDatasetWarning",
    "EmptyDatasetError",
    "TextRecord",
    "YearCount",
    "merge_datasets",
    "parse_text_records",
    "parse_yearly_counts",
    "read_dataset",
    "total_attestations",
    "write_yearly_counts",
]

YEAR_MIN = 1000
YEAR_MAX = 2100

YEARLY_HEADER = ("year", "recessive", "innovative")
TEXT_HEADER = ("text_id", "year_from", "year_to", "recessive", "innovative")


class DatasetError(ValueError):
    """Malformed or invalid count data."""


class EmptyDatasetError(DatasetError):
    pass


class DegenerateDatasetWarning(UserWarning):
    """Only one of the two forms is ever attested."""


@dataclass(frozen=True)
class YearCount:
    year: int
    recessive: int
    innovative: int

    def __post_init__(self):
        if not YEAR_MIN <= self.year <= YEAR_MAX:
            raise DatasetError(f"year {self.year} outside [{YEAR_MIN}, {YEAR_MAX}]")
        if self.recessive < 0 or self.innovative < 0:
            raise DatasetError(f"negative count in year {self.year}")

    @property
    def trials(self) -> int:
        return self.recessive + self.innovative


@dataclass(frozen=True)
class TextRecord:
    text_id: str
    year_from: int
    year_to: int
    recessive: int
    innovative: int

    def __post_init__(self):
        if self.year_from > self.year_to:
            raise DatasetError(
                f"text {self.text_id!r}: year_from {self.year_from} > year_to {self.year_to}"
            )
        if self.recessive < 0 or self.innovative < 0:
            raise DatasetError(f"text {self.text_id!r}: negative count")

    @property
    def year(self) -> int:
        """Single year the text is credited to (floor of the dating midpoint)."""
        return (self.year_from + self.year_to) // 2


@dataclass(frozen=True)
class ChangeDataset:
    """Per-year counts of a recessive and an innovative form.

    Instances are immutable; records are sorted by year with no duplicates.
    """

    name: str
    records: tuple[YearCount, ...] = ()
    recessive_label: str = "recessive"
    innovative_label: str = "innovative"

    def __post_init__(self):
        records = tuple(self.records)
        years = [r.year for r in records]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise DatasetError("records must be strictly ascending by year")
        object.__setattr__(self, "records", records)

    @classmethod
    def from_counts(cls, name: str, counts: Iterable[tuple[int, int, int]], **labels) -> "ChangeDataset":
        """Build a dataset from ``(year, recessive, innovative)`` triples, summing duplicates."""
        totals: dict[int, list[int]] = defaultdict(lambda: [0, 0])
        for year, rec, inn in counts:
            totals[int(year)][0] += int(rec)
            totals[int(year)][1] += int(inn)
        records = tuple(YearCount(y, r, i) for y, (r, i) in sorted(totals.items()))
        return cls(name, records, **labels)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def years(self) -> list[int]:
        return [r.year for r in self.records]

    @property
    def year_range(self) -> tuple[int, int] | None:
        if not self.records:
            return None
        return self.records[0].year, self.records[-1].year

    def between(self, start: int | None = None, stop: int | None = None, name: str | None = None) -> "ChangeDataset":
        """Subset with ``start <= year < stop``; either bound may be omitted."""
        keep = tuple(
            r for r in self.records
            if (start is None or r.year >= start) and (stop is None or r.year < stop)
        )
        return ChangeDataset(name or self.name, keep, self.recessive_label, self.innovative_label)

    def is_degenerate(self) -> bool:
        return not (any(r.innovative > 0 for r in self.records)
                    and any(r.recessive > 0 for r in self.records))

    def summary(self) -> dict:
        """Year range, totals and first/last attestation of each form."""
        rec, inn, tot = total_attestations(self)
        rec_years = [r.year for r in self.records if r.recessive > 0]
        inn_years = [r.year for r in self.records if r.innovative > 0]
        rng = self.year_range
        return {
            "name": self.name,
            "first_year": rng[0] if rng else None,
            "last_year": rng[1] if rng else None,
            "years": len(self.records),
            "recessive": rec,
            "innovative": inn,
            "total": tot,
            "first_recessive": min(rec_years) if rec_years else None,
            "last_recessive": max(rec_years) if rec_years else None,
            "first_innovative": min(inn_years) if inn_years else None,
            "last_innovative": max(inn_years) if inn_years else None,
        }


def _rows(source: TextIO | str):
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = (
        (lineno, line) for lineno, line in enumerate(source, start=1)
        if line.strip() and not line.lstrip().startswith("#")
    )
    for lineno, line in lines:
        row = next(csv.reader([line]))
        yield lineno, [cell.strip() for cell in row]


def _parse_int(value: str, column: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise DatasetError(f"line {lineno}: {column} is not an integer: {value!r}") from None


def _read_table(source, header: tuple[str, ...]):
    rows = _rows(source)
    try:
        lineno, first = next(rows)
    except StopIteration:
        raise EmptyDatasetError("no header and no data") from None
    if tuple(c.lower().lstrip("﻿") for c in first) != header:
        raise DatasetError(f"line {lineno}: expected header {','.join(header)!r}, got {','.join(first)!r}")
    body = []
    for lineno, row in rows:
        if len(row) != len(header):
            raise DatasetError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        body.append((lineno, row))
    if not body:
        raise EmptyDatasetError("dataset has a header but no rows")
    return body


def _finish(name: str, counts, labels) -> ChangeDataset:
    ds = ChangeDataset.from_counts(name, counts, **labels)
    if ds.is_degenerate():
        warnings.warn(
            f"{name}: only one form is attested, there is no competition to model",
            DegenerateDatasetWarning,
            stacklevel=3,
        )
    return ds


def _checked_year_count(lineno: int, year: int, rec: int, inn: int) -> tuple[int, int, int]:
    try:
        YearCount(year, rec, inn)
    except DatasetError as exc:
        raise DatasetError(f"line {lineno}: {exc}") from None
    return year, rec, inn


def parse_yearly_counts(source: TextIO | str, name: str, **labels) -> ChangeDataset:
    """Parse the ``year,recessive,innovative`` layout.

    Args:
        source: open text stream or the CSV text itself.
        name: change label, e.g. ``"wietszy_wiekszy"``.
        **labels: optional ``recessive_label`` / ``innovative_label``.

    Raises:
        DatasetError: malformed row (message carries the line number).
        EmptyDatasetError: no data rows.
    """
    counts = []
    for lineno, (year, rec, inn) in _read_table(source, YEARLY_HEADER):
        counts.append(_checked_year_count(
            lineno,
            _parse_int(year, "year", lineno),
            _parse_int(rec, "recessive", lineno),
            _parse_int(inn, "innovative", lineno),
        ))
    return _finish(name, counts, labels)


def parse_text_records(source: TextIO | str, name: str, **labels) -> ChangeDataset:
    """Parse the per-text layout, crediting each text to its floor-midpoint year."""
    counts = []
    for lineno, (text_id, y0, y1, rec, inn) in _read_table(source, TEXT_HEADER):
        record = TextRecord(
            text_id,
            _parse_int(y0, "year_from", lineno),
            _parse_int(y1, "year_to", lineno),
            _parse_int(rec, "recessive", lineno),
            _parse_int(inn, "innovative", lineno),
        )
        counts.append(_checked_year_count(lineno, record.year, record.recessive, record.innovative))
    return _finish(name, counts, labels)


def read_dataset(path, name: str | None = None) -> ChangeDataset:
    """Open a CSV file in either layout, picking the parser from its header."""
    from pathlib import Path

    path = Path(path)
    text = path.read_text(encoding="utf-8")
    name = name or path.stem
    header = next((row for _, row in _rows(text)), None)
    if header is not None and tuple(c.lower() for c in header) == TEXT_HEADER:
        return parse_text_records(text, name)
    return parse_yearly_counts(text, name)


def write_yearly_counts(ds: ChangeDataset, stream: TextIO | None = None) -> str:
    """Serialize to the yearly layout; returns the text and writes it to ``stream`` if given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(YEARLY_HEADER)
    for r in ds.records:
        writer.writerow((r.year, r.recessive, r.innovative))
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def merge_datasets(a: ChangeDataset, b: ChangeDataset, name: str) -> ChangeDataset:
    """Elementwise sum of two datasets over the union of their years."""
    counts = [(r.year, r.recessive, r.innovative) for r in (*a.records, *b.records)]
    return ChangeDataset.from_counts(
        name, counts, recessive_label=a.recessive_label, innovative_label=a.innovative_label
    )


def total_attestations(ds: ChangeDataset) -> tuple[int, int, int]:
    rec = sum(r.recessive for r in ds.records)
    inn = sum(r.innovative for r in ds.records)
    return rec, inn, rec + inn
