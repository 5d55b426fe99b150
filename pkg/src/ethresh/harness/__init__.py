"""Seeded Monte Carlo scenario harness."""

from .config import THREADS_ENV, ConfigError, ScenarioConfig, build_config, default_threads, load_config
from .runner import CHUNK, ScenarioRow, mean_row, proportion_row, rows_to_csv, run_chunked, write_csv
from .scenarios import KEY_COLUMNS, run_ebh, run_gamma, run_gaussian, run_scenario, run_ui

__all__ = [
    "CHUNK",
    "KEY_COLUMNS",
    "THREADS_ENV",
    "ConfigError",
    "ScenarioConfig",
    "ScenarioRow",
    "build_config",
    "default_threads",
    "load_config",
    "mean_row",
    "proportion_row",
    "rows_to_csv",
    "run_chunked",
    "run_ebh",
    "run_gamma",
    "run_gaussian",
    "run_scenario",
    "run_ui",
    "write_csv",
]
