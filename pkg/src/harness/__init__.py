"""Experiment harness: presets, configs, runs and CSV artifacts."""

from .experiment_config import ExperimentConfig, config_hash, load_config, validate_config
from .presets import list_presets, resolve_preset
from .runner import ExperimentRunner, resume_experiment, run_experiment
from .transfer import TransferMatrix, compute_transfer_matrix

__all__ = [
    "ExperimentConfig",
    "ExperimentRunner",
    "TransferMatrix",
    "compute_transfer_matrix",
    "config_hash",
    "list_presets",
    "load_config",
    "resolve_preset",
    "resume_experiment",
    "run_experiment",
    "validate_config",
]
