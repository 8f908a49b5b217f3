"""Experiment runner, metrics, reports and CLI."""

from sparsebo.harness.config import METHODS, ExperimentConfig
from sparsebo.harness.metrics import (
    ParetoFrontier,
    best_at_sparsity,
    best_at_sparsity_trace,
    extract_frontier,
)
from sparsebo.harness.reports import emit_reports, load_report, metric_table
from sparsebo.harness.runner import ReplicationResult, RunReport, run_experiment, run_replication

__all__ = [
    "METHODS", "ExperimentConfig", "ParetoFrontier", "ReplicationResult", "RunReport",
    "best_at_sparsity", "best_at_sparsity_trace", "emit_reports", "extract_frontier",
    "load_report", "metric_table", "run_experiment", "run_replication",
]
