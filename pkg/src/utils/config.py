"""Runtime settings and structured config-file loading."""

import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml
from dotenv import load_dotenv

from .error_handler import ArtifactError, ConfigurationError
from .logging_setup import get_logger

logger = get_logger(__name__)

_ENV_PATTERN = re.compile(r"\$\{([^}:]+)(?::-([^}]*))?\}")


@dataclass
class Settings:
    """Process-level settings resolved from the environment (and .env)."""

    log_level: str = "INFO"
    workers: Optional[int] = None
    output_root: Optional[Path] = None

    @classmethod
    def from_env(cls, env_file: Optional[Path] = None) -> "Settings":
        """Load settings, reading a .env file first when one is found."""
        if env_file is not None:
            load_dotenv(env_file, override=False)
        else:
            load_dotenv(override=False)

        settings = cls(log_level=os.environ.get("LOG_LEVEL", "INFO").upper())

        raw_workers = os.environ.get("MFEA_RL_WORKERS")
        if raw_workers:
            try:
                settings.workers = max(0, int(raw_workers))
            except ValueError:
                logger.warning("ignoring_invalid_setting", key="MFEA_RL_WORKERS", value=raw_workers)

        raw_output = os.environ.get("MFEA_RL_OUTPUT_DIR")
        if raw_output:
            settings.output_root = Path(raw_output)
        return settings


def substitute_env_vars(content: str) -> str:
    """Replace ${VAR} and ${VAR:-default} with environment values."""

    def replace_env_var(match):
        return os.getenv(match.group(1), match.group(2) or "")

    return _ENV_PATTERN.sub(replace_env_var, content)


def load_structured_file(path: Path) -> Dict[str, Any]:
    """Load a JSON or YAML mapping, with environment substitution."""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"Configuration file not found: {path}")
    try:
        content = substitute_env_vars(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ArtifactError(f"Could not read {path}: {e}") from e

    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(content)
        else:
            data = json.loads(content)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Could not parse {path.name}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigurationError(f"{path.name} must contain a mapping at the top level")
    logger.debug("config_file_loaded", path=str(path))
    return data


def merge_configs(*configs: Mapping[str, Any]) -> Dict[str, Any]:
    """Deep-merge mappings left to right; later values win."""
    merged: Dict[str, Any] = {}
    for config in configs:
        _deep_merge(merged, config)
    return merged


def _deep_merge(target: Dict[str, Any], source: Mapping[str, Any]) -> None:
    for key, value in source.items():
        if key in target and isinstance(target[key], dict) and isinstance(value, Mapping):
            _deep_merge(target[key], value)
        elif isinstance(value, Mapping):
            target[key] = {}
            _deep_merge(target[key], value)
        else:
            target[key] = value
