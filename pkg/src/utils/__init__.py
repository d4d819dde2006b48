"""Ambient utilities: settings, errors and logging."""

from .config import Settings, load_structured_file, merge_configs
from .error_handler import (
    ArtifactError,
    ConfigurationError,
    EvaluationError,
    MfeaRlError,
    UsageError,
    get_error_handler,
)
from .logging_setup import configure_logging, get_logger

__all__ = [
    "ArtifactError",
    "ConfigurationError",
    "EvaluationError",
    "MfeaRlError",
    "Settings",
    "UsageError",
    "configure_logging",
    "get_error_handler",
    "get_logger",
    "load_structured_file",
    "merge_configs",
]
