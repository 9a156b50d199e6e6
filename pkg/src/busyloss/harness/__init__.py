"""Config-driven experiment runner and command-line interface."""

from .config import CLAIMS, ConfigError, ExperimentConfig, load, loads
from .report import Report
from .runner import run_experiment

__all__ = ["CLAIMS", "ConfigError", "ExperimentConfig", "Report", "load", "loads", "run_experiment"]
