"""Experiment orchestration, reports and table dumps."""

from .pipeline import (
    COMPARISON_PAIRS,
    PSNR_DROP_LIMIT_DB,
    ComparisonRow,
    ExperimentError,
    ExperimentJob,
    ExperimentRun,
    JobResult,
    RateReport,
    RateRow,
    ReportMetadata,
    build_jobs,
    compare_rows,
    load_clips,
    log_quality_drops,
    run_experiment,
    run_job,
)
from .report import COMPARISON_COLUMNS, RATE_COLUMNS, emit_report, render_svg
from .tables import dump_tables, dump_weights

__all__ = [
    "COMPARISON_COLUMNS",
    "COMPARISON_PAIRS",
    "ComparisonRow",
    "ExperimentError",
    "ExperimentJob",
    "ExperimentRun",
    "JobResult",
    "PSNR_DROP_LIMIT_DB",
    "RATE_COLUMNS",
    "RateReport",
    "RateRow",
    "ReportMetadata",
    "build_jobs",
    "compare_rows",
    "dump_tables",
    "dump_weights",
    "emit_report",
    "load_clips",
    "log_quality_drops",
    "render_svg",
    "run_experiment",
    "run_job",
]
