"""Optimizer loop, experiments, outputs and CLI."""
from .experiment import (ExperimentAborted, ExperimentConfig, IterationRecord, RegionQualityResult,
                         RunResult, region_quality_experiment, run_experiment)
from .output import CSV_COLUMNS, emit_csv, emit_plot, read_csv
