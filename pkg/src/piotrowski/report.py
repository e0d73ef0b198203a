"""SVG figures and R² summary tables.

Figures are assembled as plain SVG text with fixed number formatting, so
identical inputs always give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .analysis import ChangeAnalysis, CompositeModel, GridResult

__all__ = [
    "PALETTE",
    "FigureDocument",
    "PlotSpec",
    "TableText",
    "emit_table",
    "point_radius",
    "render_change_plot",
    "render_composite_plot",
    "render_grid_plot",
]

PALETTE = (
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a",
    "#66a61e", "#e6ab02", "#a6761d", "#666666",
)

DASHES = {"solid": None, "dashed": "8 5", "dotted": "2 4"}


def default_line_style(label: str) -> str:
    if label.startswith("raw_"):
        return "dotted"
    if label.endswith("unweighted"):
        return "dashed"
    return "solid"


@dataclass(frozen=True)
class PlotSpec:
    title: str = ""
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] = (0.0, 1.0)
    radius_mode: str = "constant"
    base_radius: float = 1.5
    line_styles: dict[str, str] = field(default_factory=dict)
    x_label: str = "year"
    y_label: str = "p(innovative)"
    width: int = 720
    height: int = 450

    def style_for(self, label: str) -> str:
        return self.line_styles.get(label) or default_line_style(label)


def point_radius(trials: float, spec: PlotSpec) -> float:
    if spec.radius_mode == "constant":
        return 3.0
    if spec.radius_mode != "log":
        raise ValueError(f"unknown radius mode {spec.radius_mode!r}")
    return float(min(12.0, max(1.0, spec.base_radius * math.log1p(trials))))


@dataclass(frozen=True)
class FigureDocument:
    svg: str
    width: int
    height: int

    def __str__(self):
        return self.svg

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.svg, encoding="utf-8")
        return path


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _nice_step(span: float, target: int = 8) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


class _Canvas:
    LEFT, RIGHT, TOP, BOTTOM = 60, 20, 40, 50

    def __init__(self, spec: PlotSpec, x_range, legend_width: int = 0):
        self.spec = spec
        self.x0, self.x1 = x_range
        if self.x1 <= self.x0:
            self.x0, self.x1 = self.x0 - 1, self.x1 + 1
        self.y0, self.y1 = spec.y_range
        self.plot_w = spec.width - self.LEFT - self.RIGHT - legend_width
        self.plot_h = spec.height - self.TOP - self.BOTTOM
        self.parts: list[str] = []

    def px(self, x) -> float:
        return self.LEFT + (x - self.x0) / (self.x1 - self.x0) * self.plot_w

    def py(self, y) -> float:
        return self.TOP + (self.y1 - y) / (self.y1 - self.y0) * self.plot_h

    def axes(self):
        s = self.spec
        bottom, right = self.TOP + self.plot_h, self.LEFT + self.plot_w
        out = self.parts
        out.append(f'<rect x="{self.LEFT}" y="{self.TOP}" width="{self.plot_w}" height="{self.plot_h}" '
                   'fill="none" stroke="#000"/>')
        step = _nice_step(self.x1 - self.x0)
        tick = math.ceil(self.x0 / step) * step
        while tick <= self.x1 + 1e-9:
            x = self.px(tick)
            label = f"{tick:g}"
            out.append(f'<line x1="{_f(x)}" y1="{bottom}" x2="{_f(x)}" y2="{bottom + 5}" stroke="#000"/>')
            out.append(f'<text x="{_f(x)}" y="{bottom + 18}" font-size="11" text-anchor="middle">{label}</text>')
            tick += step
        for k in range(6):
            yv = self.y0 + (self.y1 - self.y0) * k / 5
            y = self.py(yv)
            out.append(f'<line x1="{self.LEFT - 5}" y1="{_f(y)}" x2="{self.LEFT}" y2="{_f(y)}" stroke="#000"/>')
            out.append(f'<text x="{self.LEFT - 8}" y="{_f(y + 4)}" font-size="11" text-anchor="end">{yv:.1f}</text>')
        out.append(f'<text x="{_f((self.LEFT + right) / 2)}" y="{s.height - 12}" font-size="12" '
                   f'text-anchor="middle">{escape(s.x_label)}</text>')
        out.append(f'<text x="15" y="{_f(self.TOP + self.plot_h / 2)}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 15 {_f(self.TOP + self.plot_h / 2)})">{escape(s.y_label)}</text>')
        if s.title:
            out.append(f'<text x="{_f(s.width / 2)}" y="22" font-size="14" text-anchor="middle">'
                       f'{escape(s.title)}</text>')

    def polyline(self, xs, ys, color: str, style: str, cls: str, label: str):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        dash = DASHES[style]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline class="{cls}" data-label="{escape(label)}" points="{pts}" fill="none" '
                          f'stroke="{color}" stroke-width="1.8"{dash_attr}/>')

    def circle(self, x, y, r, color: str, cls: str, fill_opacity: float = 0.6):
        self.parts.append(f'<circle class="{cls}" cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" r="{_f(r)}" '
                          f'fill="{color}" fill-opacity="{fill_opacity}" stroke="{color}"/>')

    def legend(self, entries):
        x = self.LEFT + self.plot_w + 12
        for i, (label, color, style) in enumerate(entries):
            y = self.TOP + 14 + 18 * i
            dash = DASHES[style]
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            self.parts.append(f'<line class="legend" x1="{x}" y1="{y}" x2="{x + 24}" y2="{y}" stroke="{color}" '
                              f'stroke-width="2"{dash_attr}/>')
            self.parts.append(f'<text x="{x + 30}" y="{y + 4}" font-size="11">{escape(label)}</text>')

    def document(self) -> FigureDocument:
        s = self.spec
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{s.width}" height="{s.height}" '
                f'viewBox="0 0 {s.width} {s.height}">')
        body = "\n".join([head, f'<rect width="{s.width}" height="{s.height}" fill="#fff"/>',
                          *self.parts, "</svg>", ""])
        return FigureDocument(body, s.width, s.height)


def _year_axis(lo: float, hi: float) -> tuple[float, float]:
    return math.floor(lo / 10) * 10, math.ceil(hi / 10) * 10


def render_change_plot(analysis: ChangeAnalysis, spec: PlotSpec | None = None) -> FigureDocument:
    """Bin proportions as points with every successful fit drawn on top.

    Weighted fits are solid, unweighted dashed and one-year fits dotted
    unless ``spec.line_styles`` says otherwise.
    """
    if not analysis.fits:
        raise ValueError(f"{analysis.name}: nothing to draw, no fit succeeded")
    spec = spec or PlotSpec(title=analysis.name)
    bins = analysis.series.bins
    if spec.x_range:
        x_range = spec.x_range
    elif bins:
        x_range = _year_axis(bins[0].start_year, bins[-1].end_year)
    else:
        x_range = _year_axis(min(f.center for f in analysis.fits.values()) - 50,
                             max(f.center for f in analysis.fits.values()) + 50)
    legend_w = 150
    canvas = _Canvas(spec, x_range, legend_width=legend_w)
    canvas.axes()
    for b in bins:
        canvas.circle(b.midpoint, b.proportion, point_radius(b.trials, spec), "#000", "bin", 0.35)

    years = np.arange(math.ceil(canvas.x0), math.floor(canvas.x1) + 1, dtype=float)
    legend = []
    for i, (label, fit) in enumerate(analysis.fits.items()):
        color = PALETTE[i % len(PALETTE)]
        style = spec.style_for(label)
        canvas.polyline(years, np.clip(fit.predict(years), 0.0, 1.0), color, style, "fit", label)
        legend.append((f"{label} (R² {fit.mcfadden_r2:.3f})", color, style))
    canvas.legend(legend)
    return canvas.document()


def render_grid_plot(results: list[GridResult], overlap_filter: int,
                     spec: PlotSpec | None = None) -> FigureDocument:
    """R² against window size at one overlap, one line per change."""
    series = []
    for res in results:
        pts = [(e.window, e.r2) for e in res.entries if e.overlap == overlap_filter and not math.isnan(e.r2)]
        if pts:
            series.append((res.name, sorted(pts)))
    if not series:
        raise ValueError(f"no grid entries at overlap {overlap_filter}")
    spec = spec or PlotSpec(title=f"goodness of fit, {overlap_filter}-year overlap",
                            x_label="window (years)", y_label="McFadden R²")
    xs = [w for _, pts in series for w, _ in pts]
    lo, hi = min(xs), max(xs)
    canvas = _Canvas(spec, (lo - 5, hi + 5) if lo == hi else (lo, hi), legend_width=150)
    canvas.axes()
    legend = []
    for i, (name, pts) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        ws, r2 = zip(*pts)
        if len(pts) > 1:
            canvas.polyline(ws, r2, color, "solid", "grid", name)
        for w, r in pts:
            canvas.circle(w, r, 2.5, color, "marker", 1.0)
        legend.append((name, color, "solid"))
    canvas.legend(legend)
    return canvas.document()


def render_composite_plot(model: CompositeModel, spec: PlotSpec | None = None) -> FigureDocument:
    """All selected change curves on one time axis."""
    spec = spec or PlotSpec(title="composite view")
    years = model.years
    canvas = _Canvas(spec, (float(years[0]), float(years[-1])), legend_width=170)
    canvas.axes()
    legend = []
    for i, curve in enumerate(model.curves):
        color = PALETTE[i % len(PALETTE)]
        canvas.polyline(curve.years, np.clip(curve.probabilities, 0.0, 1.0), color, "solid", "curve", curve.name)
        legend.append((curve.name, color, "solid"))
    canvas.legend(legend)
    return canvas.document()


@dataclass(frozen=True)
class TableText:
    markdown: str
    csv: str


def emit_table(results: list[GridResult], cells=((50, 20), (20, 5))) -> TableText:
    """Changes as rows, ``(window, overlap)`` cells as columns, R² to three decimals.

    A missing cell is left blank and reported with a warning.
    """
    cells = [tuple(c) for c in cells]
    names = [f"w{w}/o{o}" for w, o in cells]
    md = ["| change | " + " | ".join(names) + " |", "|---|" + "---:|" * len(cells)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["change", *names])
    for res in results:
        values = []
        for w, o in cells:
            entry = res.cell(w, o)
            if entry is None or math.isnan(entry.r2):
                warnings.warn(f"{res.name}: no R² for window {w} / overlap {o}", stacklevel=2)
                values.append("")
            else:
                values.append(f"{entry.r2:.3f}")
        md.append(f"| {res.name} | " + " | ".join(values) + " |")
        writer.writerow([res.name, *values])
    return TableText("\n".join(md) + "\n", buf.getvalue())
