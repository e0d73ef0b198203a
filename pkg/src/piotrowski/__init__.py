"""Logistic modelling of competition between a recessive and an innovative form."""

__version__ = "0.1.0"

from .analysis import (
    AnalysisConfig,
    ChangeAnalysis,
    CompositeModel,
    GridResult,
    analyze_change,
    analyze_polynomial,
    composite,
    grid_search,
    split_fit,
)
from .binning import Bin, BinSeries, Weighting, make_bins, raw_yearly_bins
from .dataset import (
    ChangeDataset,
    DatasetError,
    YearCount,
    merge_datasets,
    parse_text_records,
    parse_yearly_counts,
    read_dataset,
    total_attestations,
)
from .diagnostics import chi_square_sf, fit_null, lr_test, mcfadden_r2
from .glm import LogisticCurve, LogisticFit, build_design, fit_logistic, predict, to_piotrowski

__all__ = [
    "AnalysisConfig",
    "Bin",
    "BinSeries",
    "ChangeAnalysis",
    "ChangeDataset",
    "CompositeModel",
    "DatasetError",
    "GridResult",
    "LogisticCurve",
    "LogisticFit",
    "Weighting",
    "YearCount",
    "analyze_change",
    "analyze_polynomial",
    "build_design",
    "chi_square_sf",
    "composite",
    "fit_logistic",
    "fit_null",
    "grid_search",
    "lr_test",
    "make_bins",
    "mcfadden_r2",
    "merge_datasets",
    "parse_text_records",
    "parse_yearly_counts",
    "predict",
    "raw_yearly_bins",
    "read_dataset",
    "split_fit",
    "to_piotrowski",
    "total_attestations",
]
