"""Configuration, experiment runners and CSV reports used by the command line."""
from .config import DEFAULTS, ExperimentConfig, load_config
from .report import RunReport, SlopeFit, fit_loglog
from .runners import RUNNERS

__all__ = ["DEFAULTS", "ExperimentConfig", "load_config", "RunReport", "SlopeFit", "fit_loglog", "RUNNERS"]
