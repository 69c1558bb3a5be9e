from qmlfraud.harness.config import ExperimentConfig, load_config, parse_config
from qmlfraud.harness.metrics import MetricSet, compute_metrics
from qmlfraud.harness.report import write_reports
from qmlfraud.harness.runner import RunRecord, run_experiment, run_grid

__all__ = [
    "ExperimentConfig",
    "MetricSet",
    "RunRecord",
    "compute_metrics",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_grid",
    "write_reports",
]
