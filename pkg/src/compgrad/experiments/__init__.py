"""Seeded experiment harness: suites, records, scaling fits and the CLI."""
from .config import ConfigError, ExperimentConfig, default_config, load_config, validate
from .records import RunRecord, fit_scaling, read_csv, records_to_csv, write_csv
from .runner import RunResult, run

__all__ = ["ConfigError", "ExperimentConfig", "default_config", "load_config", "validate",
           "RunRecord", "fit_scaling", "read_csv", "records_to_csv", "write_csv", "RunResult",
           "run"]
