"""Batch services behind the CLI commands."""

from .training import TrainingResult, TrainingService
from .fitting import FitOptions, FitOutcome, FitService, InitMode, SUMMARY_COLUMNS
from .evaluation import (
    AGGREGATE_COLUMNS,
    HISTOGRAM_COLUMNS,
    AggregateRow,
    aggregate_reports,
    find_reports,
    radius_histogram,
)

__all__ = [
    "TrainingResult",
    "TrainingService",
    "FitOptions",
    "FitOutcome",
    "FitService",
    "InitMode",
    "SUMMARY_COLUMNS",
    "AGGREGATE_COLUMNS",
    "HISTOGRAM_COLUMNS",
    "AggregateRow",
    "aggregate_reports",
    "find_reports",
    "radius_histogram",
]
