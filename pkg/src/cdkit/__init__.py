"""cdkit: a config-driven toolbox for bi-temporal change detection."""

__version__ = "0.1.0"

from . import data, engine, models, tools  # noqa: F401 - register components
from .config import (apply_override, dump_config, merge_config,
                     parse_cfg_options, parse_config)
from .errors import ConfigError, DataError
from .metrics import ChangeMetrics, ConfusionMatrix, compute_change_metrics
from .registry import (DATASETS, HOOKS, LOSSES, METRICS, MODELS, TRANSFORMS,
                       Registry, build_component)

__all__ = [
    "__version__", "apply_override", "dump_config", "merge_config",
    "parse_cfg_options", "parse_config", "ConfigError", "DataError",
    "ChangeMetrics", "ConfusionMatrix", "compute_change_metrics", "DATASETS",
    "HOOKS", "LOSSES", "METRICS", "MODELS", "TRANSFORMS", "Registry",
    "build_component",
]


def config_path(relative):
    """Absolute path to a config shipped inside the package."""
    import os
    return os.path.join(os.path.dirname(__file__), "configs", relative)
