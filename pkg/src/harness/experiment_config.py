"""Experiment configuration schema (see docs/CONFIG_SCHEMA.md)."""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.evaluator import SeedPolicy, TaskSpec
from ..core.mfea import MfeaConfig
from ..core.policy_net import Activation
from ..core.unified_genome import PartitionMap, build_partition_map
from ..utils.config import load_structured_file, merge_configs
from ..utils.error_handler import ConfigurationError, MfeaRlError
from ..utils.logging_setup import get_logger
from .presets import canonical_name, resolve_preset

logger = get_logger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TaskEntry(_Strict):
    """One task: a preset plus optional episode-protocol settings."""

    preset: str
    name: Optional[str] = None
    max_steps: Optional[int] = Field(default=None, ge=1)
    torque_bins: Optional[int] = Field(default=None, ge=3)
    n_fitness_episodes: int = Field(default=50, ge=1)
    n_test_episodes: int = Field(default=250, ge=1)
    episode_seed_policy: SeedPolicy = SeedPolicy.FIXED_SET

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: str) -> str:
        try:
            return canonical_name(value)
        except ConfigurationError as e:
            raise ValueError(e.message) from e

    @field_validator("torque_bins")
    @classmethod
    def _odd_bins(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value % 2 == 0:
            raise ValueError(f"must be odd, got {value}")
        return value


class ArchitectureSettings(_Strict):
    hidden: List[int] = Field(default_factory=lambda: [16, 16, 8], min_length=1)
    activation: Activation = Activation.RELU
    shared_layers: int = Field(default=3, ge=1)
    w_max: float = Field(default=4.0, gt=0)

    @field_validator("hidden")
    @classmethod
    def _positive_widths(cls, value: List[int]) -> List[int]:
        if any(width < 1 for width in value):
            raise ValueError("hidden widths must be positive")
        return value

    @model_validator(mode="after")
    def _shared_fits(self) -> "ArchitectureSettings":
        weight_layers = len(self.hidden) + 1
        if self.shared_layers >= weight_layers:
            raise ValueError(
                f"shared_layers must be < {weight_layers} (number of weight layers)"
            )
        return self


class MfeaSettings(_Strict):
    population_size: int = Field(default=100, ge=4)
    generations: int = Field(default=60, ge=0)
    max_evaluations: Optional[int] = Field(default=None, ge=0)
    rmp: float = Field(default=0.3, ge=0.0, le=1.0)
    sbx_eta: float = Field(default=15.0, gt=0)
    mutation_eta: float = Field(default=20.0, gt=0)
    mutation_prob: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    constraint_penalty: float = Field(default=0.0, ge=0.0)

    @field_validator("population_size")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"must be even, got {value}")
        return value

    @model_validator(mode="after")
    def _budget(self) -> "MfeaSettings":
        if self.max_evaluations is not None:
            derived = self.max_evaluations // self.population_size
            if "generations" in self.model_fields_set and self.generations != derived:
                raise ValueError(
                    f"generations={self.generations} contradicts max_evaluations={self.max_evaluations} "
                    f"(which gives {derived}); set only one of them"
                )
            self.generations = derived
        return self


class ExperimentConfig(_Strict):
    """A validated experiment: tasks, MFEA settings, runs and outputs."""

    name: str = Field(min_length=1)
    description: str = ""
    base_seed: int = 0
    runs: int = Field(default=5, ge=1)
    output_dir: str = "results"
    parallel: int = Field(default=1, ge=0)
    checkpoint_every: int = Field(default=1, ge=0)
    tasks: List[TaskEntry] = Field(min_length=1)
    architecture: ArchitectureSettings = Field(default_factory=ArchitectureSettings)
    mfea: MfeaSettings = Field(default_factory=MfeaSettings)

    @model_validator(mode="after")
    def _tasks_consistent(self) -> "ExperimentConfig":
        if self.mfea.population_size < len(self.tasks):
            raise ValueError(
                f"mfea.population_size ({self.mfea.population_size}) must be >= "
                f"the number of tasks ({len(self.tasks)})"
            )
        names = [entry.name or entry.preset for entry in self.tasks]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(
                f"task names must be unique, repeated: {', '.join(duplicates)} (set tasks.N.name)"
            )
        return self

    def task_specs(self) -> List[TaskSpec]:
        specs = []
        for index, entry in enumerate(self.tasks):
            overrides = {}
            if entry.max_steps is not None:
                overrides["max_steps"] = entry.max_steps
            if entry.torque_bins is not None:
                overrides["torque_bins"] = entry.torque_bins
            specs.append(
                TaskSpec.with_default_architecture(
                    index,
                    resolve_preset(entry.preset, **overrides),
                    hidden=tuple(self.architecture.hidden),
                    activation=self.architecture.activation,
                    name=entry.name or entry.preset,
                    preset=entry.preset,
                    n_fitness_episodes=entry.n_fitness_episodes,
                    n_test_episodes=entry.n_test_episodes,
                    episode_seed_policy=entry.episode_seed_policy,
                )
            )
        return specs

    def partition_map(self) -> PartitionMap:
        return build_partition_map(
            [spec.architecture for spec in self.task_specs()],
            self.architecture.shared_layers,
            self.architecture.w_max,
        )

    def mfea_config(self, seed: int) -> MfeaConfig:
        settings = self.mfea.model_dump(exclude={"max_evaluations"})
        return MfeaConfig(seed=seed, **settings)

    def canonical_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of the effective config."""
    canonical = json.dumps(config.canonical_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _field_path(error: Mapping[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def validate_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a raw mapping; the first problem becomes a ConfigurationError with its field path."""
    try:
        config = ExperimentConfig.model_validate(dict(raw))
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigurationError(
            first["msg"].removeprefix("Value error, "),
            field_path=_field_path(first),
            suggestion="see docs/CONFIG_SCHEMA.md for the expected fields",
        ) from e
    try:
        # builds every architecture and the unified genome map once
        config.partition_map()
    except MfeaRlError as e:
        raise ConfigurationError(e.message, field_path=e.field_path or "tasks") from e
    return config


def load_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Load JSON/YAML, deep-merge ``overrides`` and validate the effective config."""
    raw = load_structured_file(Path(path))
    effective = merge_configs(raw, overrides or {})
    config = validate_config(effective)
    logger.debug(
        "experiment_config_loaded",
        path=str(path),
        name=config.name,
        tasks=[t.preset for t in config.tasks],
        hash=config_hash(config)[:12],
    )
    return config
