"""Command-line entry point: ``piotrowski <command> ...``.

Exit status: 0 success, 1 usage error, 2 data error, 3 failed fit.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .analysis import (
    AnalysisConfig,
    ChangeAnalysis,
    analyze_change,
    analyze_polynomial,
    composite,
    grid_search,
    read_grid_csv,
    split_fit,
)
from .binning import DEFAULT_ANCHOR, BinningError, Weighting
from .dataset import DatasetError, read_dataset
from .glm import fits_to_csv
from .report import PlotSpec, emit_table, render_change_plot, render_composite_plot, render_grid_plot

log = logging.getLogger("piotrowski")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> list[int]:
    """``start:end:step`` (end included when on the step) or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, end, step = parts
            if step <= 0:
                raise ValueError
            return list(range(start, end + 1, step))
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected start:end:step") from None


def parse_cell(text: str) -> tuple[int, int]:
    try:
        w, o = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cell {text!r}, expected WINDOW,OVERLAP") from None
    return w, o


def _add_binning(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", type=int, default=20, help="window size in years (default 20)")
    p.add_argument("--overlap", type=int, default=10, help="overlap of adjacent windows in years (default 10)")
    p.add_argument("--anchor", type=int, default=DEFAULT_ANCHOR,
                   help=f"year windows are aligned to (default {DEFAULT_ANCHOR})")


def _add_weighting(p: argparse.ArgumentParser, default: str = "both") -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--weighted", dest="weighting", action="store_const", const="weighted")
    g.add_argument("--unweighted", dest="weighting", action="store_const", const="unweighted")
    g.add_argument("--both", dest="weighting", action="store_const", const="both")
    p.set_defaults(weighting=default)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")
    p.add_argument("--name", help="change name (default: file stem)")
    p.add_argument("--log-radius", action="store_true", help="scale points by ln(1 + attestations)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="piotrowski", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="weighted/unweighted logistic fits with plot")
    p.add_argument("data", type=Path)
    _add_binning(p)
    _add_weighting(p)
    p.add_argument("--raw-yearly", action=argparse.BooleanOptionalAction, default=True,
                   help="also fit one-year bins (default on)")
    _add_common(p)

    p = sub.add_parser("poly", help="polynomial logistic fits")
    p.add_argument("data", type=Path)
    p.add_argument("--degree", type=int, required=True)
    _add_binning(p)
    _add_weighting(p)
    p.add_argument("--raw-yearly", action=argparse.BooleanOptionalAction, default=False)
    _add_common(p)

    p = sub.add_parser("split", help="independent fits before and after a split year")
    p.add_argument("data", type=Path)
    p.add_argument("--at", type=int, required=True, dest="split_year")
    _add_binning(p)
    _add_weighting(p)
    _add_common(p)

    p = sub.add_parser("grid", help="R² over a window/overlap lattice",
                       description="Ranges are start:end:step, end included when it falls on a step.")
    p.add_argument("data", type=Path, nargs="+")
    p.add_argument("--windows", type=parse_range, default=parse_range("5:100:5"))
    p.add_argument("--overlaps", type=parse_range, default=parse_range("5:100:5"))
    p.add_argument("--anchor", type=int, default=DEFAULT_ANCHOR)
    p.add_argument("--degree", type=int, default=1)
    _add_weighting(p, default="unweighted")
    p.add_argument("--plot-overlaps", type=parse_range, default=[10, 20],
                   help="overlaps to draw R²-vs-window plots for (default 10,20)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default $PIOTROWSKI_THREADS, 0 = one per CPU)")
    p.add_argument("--out", type=Path, default=Path("out"))

    p = sub.add_parser("composite", help="all changes on one plot with 1:1 crossing offsets")
    p.add_argument("data", type=Path, nargs="+")
    _add_binning(p)
    p.add_argument("--out", type=Path, default=Path("out"))

    p = sub.add_parser("table", help="summary table of chosen grid cells")
    p.add_argument("grids", type=Path, nargs="+")
    p.add_argument("--cells", type=parse_cell, nargs="+", default=[(50, 20), (20, 5)])
    p.add_argument("--out", type=Path, default=Path("out"))

    p = sub.add_parser("validate", help="dataset summary")
    p.add_argument("data", type=Path)
    p.add_argument("--name")
    p.add_argument("--out", type=Path, default=Path("out"))
    return parser


def _weightings(choice: str) -> tuple[Weighting, ...]:
    if choice == "both":
        return Weighting.WEIGHTED, Weighting.UNWEIGHTED
    return (Weighting(choice),)


def _config(args, degree: int = 1, raw: bool = False) -> AnalysisConfig:
    if not 0 <= args.overlap < args.window:
        raise UsageError(f"overlap ({args.overlap}) must be non-negative and smaller than the window ({args.window})")
    return AnalysisConfig(args.window, args.overlap, args.anchor, degree, _weightings(args.weighting), raw)


def _manifest(args, out: Path, inputs, config: dict) -> None:
    manifest = {
        "tool": "piotrowski",
        "version": __version__,
        "command": args.command,
        "inputs": [str(p) for p in inputs],
        "config": config,
        "out": str(out),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cfg_echo(cfg: AnalysisConfig) -> dict:
    return {
        "window": cfg.window_years,
        "overlap": cfg.overlap_years,
        "anchor": cfg.anchor_year,
        "degree": cfg.degree,
        "weighting": [w.value for w in cfg.weightings],
        "raw_yearly": cfg.include_raw_yearly,
    }


def _print_fits(analyses: list[ChangeAnalysis]) -> None:
    for a in analyses:
        for label, fit in a.fits.items():
            betas = ", ".join(f"{b:.6g}" for b in fit.coeffs_raw)
            print(f"{a.name}\t{label}\tR2={fit.mcfadden_r2:.3f}\tp={fit.p_value:.3g}\t"
                  f"df={fit.df_residual}\tbeta=({betas})\tconverged={fit.converged}")
        for label, reason in a.failures.items():
            print(f"{a.name}\t{label}\tFAILED: {reason}")


def _write_analyses(out: Path, stem: str, analyses: list[ChangeAnalysis], spec: PlotSpec,
                    plot: ChangeAnalysis | None = None) -> None:
    rows = []
    for a in analyses:
        rows.extend(a.rows())
    (out / f"{stem}_fits.csv").write_text(fits_to_csv(rows), encoding="utf-8")
    (out / f"{stem}_bins.csv").write_text(
        "".join(a.series.to_csv() if i == 0 else a.series.to_csv().split("\n", 1)[1]
                for i, a in enumerate(analyses)), encoding="utf-8")
    target = plot or analyses[0]
    if target.fits:
        render_change_plot(target, spec).write(out / f"{stem}.svg")


def _spec(args, title: str) -> PlotSpec:
    return PlotSpec(title=title, radius_mode="log" if args.log_radius else "constant")


def cmd_fit(args) -> int:
    cfg = _config(args, raw=args.raw_yearly)
    ds = read_dataset(args.data, args.name)
    analysis = analyze_change(ds, cfg)
    stem = f"{ds.name}_{cfg.window_years}w{cfg.overlap_years}o"
    _write_analyses(args.out, stem, [analysis], _spec(args, ds.name))
    _manifest(args, args.out, [args.data], _cfg_echo(cfg))
    _print_fits([analysis])
    return EXIT_FIT if analysis.failures else EXIT_OK


def cmd_poly(args) -> int:
    if args.degree < 2:
        raise UsageError("--degree must be at least 2 for polynomial fits")
    cfg = _config(args, degree=args.degree, raw=args.raw_yearly)
    ds = read_dataset(args.data, args.name)
    analysis = analyze_polynomial(ds, args.degree, cfg)
    stem = f"{ds.name}_{cfg.window_years}w{cfg.overlap_years}o_poly{args.degree}"
    _write_analyses(args.out, stem, [analysis], _spec(args, f"{ds.name}, degree {args.degree}"))
    _manifest(args, args.out, [args.data], _cfg_echo(cfg))
    _print_fits([analysis])
    return EXIT_FIT if analysis.failures else EXIT_OK


def cmd_split(args) -> int:
    cfg = _config(args)
    ds = read_dataset(args.data, args.name)
    try:
        early, late = split_fit(ds, args.split_year, cfg)
    except ValueError as exc:
        raise DatasetError(str(exc)) from None
    merged = ChangeAnalysis(
        ds.name,
        type(early.series)(early.series.bins + late.series.bins, cfg.window_years, cfg.overlap_years,
                           cfg.anchor_year),
    )
    for part, tag in ((early, "before"), (late, "from")):
        for label, fit in part.fits.items():
            merged.fits[f"{tag}_{args.split_year}_{label}"] = fit
    stem = f"{ds.name}_{cfg.window_years}w{cfg.overlap_years}o_split{args.split_year}"
    _write_analyses(args.out, stem, [early, late], _spec(args, f"{ds.name}, split at {args.split_year}"),
                    plot=merged)
    echo = _cfg_echo(cfg)
    echo["split_year"] = args.split_year
    _manifest(args, args.out, [args.data], echo)
    _print_fits([early, late])
    return EXIT_FIT if early.failures or late.failures else EXIT_OK


def cmd_grid(args) -> int:
    datasets = [read_dataset(p) for p in args.data]
    weightings = _weightings(args.weighting)
    results = [
        grid_search(ds, args.windows, args.overlaps, w, args.degree, args.anchor, args.threads)
        for ds in datasets for w in weightings
    ]
    n_entries = sum(len(r.entries) for r in results)
    if n_entries == 0:
        warnings.warn("no valid (window, overlap) combination: every overlap is >= its window")
        print("warning: empty grid, no combination with overlap < window", file=sys.stderr)
    text = "".join(r.to_csv(header=(i == 0)) for i, r in enumerate(results))
    if not results or not text:
        text = ",".join(("change", "window", "overlap", "weighting", "degree", "r2", "p_value", "converged")) + "\n"
    (args.out / "grid.csv").write_text(text, encoding="utf-8")
    for overlap in args.plot_overlaps:
        if any(e.overlap == overlap and e.r2 == e.r2 for r in results for e in r.entries):
            render_grid_plot(results, overlap).write(args.out / f"grid_{overlap}o.svg")
    _manifest(args, args.out, args.data, {
        "windows": args.windows, "overlaps": args.overlaps, "anchor": args.anchor,
        "degree": args.degree, "weighting": [w.value for w in weightings],
        "plot_overlaps": args.plot_overlaps,
    })
    print(f"{n_entries} grid entries written to {args.out / 'grid.csv'}")
    return EXIT_OK


def cmd_composite(args) -> int:
    if not 0 <= args.overlap < args.window:
        raise UsageError("overlap must be smaller than the window")
    cfg = AnalysisConfig(args.window, args.overlap, args.anchor, 1, (Weighting.WEIGHTED,), False)
    analyses = [analyze_change(read_dataset(p), cfg) for p in args.data]
    if len(analyses) < 2:
        raise UsageError("composite needs at least two datasets")
    model = composite(analyses)
    render_composite_plot(model).write(args.out / "composite.svg")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("change_a", "change_b", "t_half_a", "t_half_b", "offset_years"))
    halves = {c.name: c.t_half for c in model.curves}
    for (a, b), off in model.offsets.items():
        writer.writerow((a, b, f"{halves[a]:.3f}", f"{halves[b]:.3f}", f"{off:.3f}"))
    (args.out / "composite_offsets.csv").write_text(buf.getvalue(), encoding="utf-8")
    _manifest(args, args.out, args.data, _cfg_echo(cfg))
    print(buf.getvalue(), end="")
    return EXIT_OK


def cmd_table(args) -> int:
    results = []
    for path in args.grids:
        results.extend(read_grid_csv(path.read_text(encoding="utf-8")))
    table = emit_table(results, args.cells)
    (args.out / "table1.md").write_text(table.markdown, encoding="utf-8")
    (args.out / "table1.csv").write_text(table.csv, encoding="utf-8")
    _manifest(args, args.out, args.grids, {"cells": [list(c) for c in args.cells]})
    print(table.markdown, end="")
    return EXIT_OK


def cmd_validate(args) -> int:
    ds = read_dataset(args.data, args.name)
    summary = ds.summary()
    for key, value in summary.items():
        print(f"{key}: {value}")
    _manifest(args, args.out, [args.data], {})
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "poly": cmd_poly,
    "split": cmd_split,
    "grid": cmd_grid,
    "composite": cmd_composite,
    "table": cmd_table,
    "validate": cmd_validate,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"piotrowski: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BinningError as exc:
        print(f"piotrowski: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, OSError, KeyError) as exc:
        print(f"piotrowski: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
