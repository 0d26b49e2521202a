"""Monte Carlo harness: experiments, paired comparisons, intervals and CSV output."""

from .csv_report import CSV_COLUMNS, append_csv, summaries_to_csv
from .engine import (
    SCHEMES,
    ExperimentConfig,
    PairedComparison,
    TrialSummary,
    paired_compare,
    run_experiment,
)
from .stats import confidence_interval

__all__ = [
    "CSV_COLUMNS",
    "SCHEMES",
    "ExperimentConfig",
    "PairedComparison",
    "TrialSummary",
    "append_csv",
    "confidence_interval",
    "paired_compare",
    "run_experiment",
    "summaries_to_csv",
]
