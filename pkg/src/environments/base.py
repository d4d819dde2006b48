"""Environment configuration, state types and the batched environment interface."""

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..core.seeding import make_rng
from ..utils.error_handler import ConfigurationError, UsageError


class EnvId(str, Enum):
    """Supported classic-control environments."""

    CARTPOLE = "cartpole"
    ACROBOT = "acrobot"
    PENDULUM = "pendulum"


DEFAULT_EPISODE_CAPS = {
    EnvId.CARTPOLE: 300,
    EnvId.ACROBOT: 500,
    EnvId.PENDULUM: 200,
}


@dataclass(frozen=True)
class EnvConfig:
    """Environment identifier plus its physical configuration.

    Only the fields relevant to ``env_id`` are read by the dynamics.
    """

    env_id: EnvId
    pole_length: float = 0.5
    joint_length: float = 1.0
    max_speed: float = 8.0
    max_torque: float = 2.0
    max_steps: Optional[int] = None
    torque_bins: int = 5

    def __post_init__(self):
        object.__setattr__(self, "env_id", EnvId(self.env_id))
        self.validate()

    def validate(self) -> None:
        """Raise ConfigurationError on non-positive parameters."""
        for name in ("pole_length", "joint_length", "max_speed", "max_torque"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"must be strictly positive, got {value}", field_path=name)
        if self.max_steps is not None and int(self.max_steps) < 1:
            raise ConfigurationError(
                f"must be a positive integer, got {self.max_steps}", field_path="max_steps"
            )
        if self.torque_bins < 3 or self.torque_bins % 2 == 0:
            raise ConfigurationError(
                f"must be an odd integer >= 3, got {self.torque_bins}",
                field_path="torque_bins",
            )

    @property
    def episode_cap(self) -> int:
        if self.max_steps is not None:
            return int(self.max_steps)
        return DEFAULT_EPISODE_CAPS[self.env_id]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["env_id"] = self.env_id.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EnvConfig":
        return cls(**data)


@dataclass(frozen=True)
class EnvState:
    """Physical state of one episode plus its step counter."""

    env_id: EnvId
    values: Tuple[float, ...]
    step_count: int = 0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class StepResult:
    """Outcome of one control step."""

    observation: np.ndarray
    reward: float
    done: bool


class BaseEnvironment(ABC):
    """Dynamics of one environment, vectorized over a batch of episodes.

    Every array method takes ``states`` of shape (n, state_dim) and works
    row-wise, so the single-episode API is the n=1 case.
    """

    env_id: EnvId
    state_dim: int
    obs_dim: int

    @abstractmethod
    def n_actions(self, config: EnvConfig) -> int:
        """Size of the discrete action set."""

    @abstractmethod
    def sample_initial(self, rng: np.random.Generator, config: EnvConfig) -> np.ndarray:
        """One initial state drawn from the standard initial distribution."""

    @abstractmethod
    def advance(
        self, states: np.ndarray, actions: np.ndarray, config: EnvConfig
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Advance every row one control step.

        Returns (next_states, rewards, terminal) where ``terminal`` ignores
        the step cap.
        """

    @abstractmethod
    def observe(self, states: np.ndarray, config: EnvConfig) -> np.ndarray:
        """Observation rows for the given states."""

    def initial_states(self, seeds: Sequence[int], config: EnvConfig) -> np.ndarray:
        """Initial states for a batch; row i depends only on seeds[i]."""
        rows = [self.sample_initial(make_rng(seed), config) for seed in seeds]
        return np.stack(rows).reshape(len(rows), self.state_dim)

    def check_actions(self, actions: np.ndarray, config: EnvConfig) -> np.ndarray:
        actions = np.asarray(actions)
        n = self.n_actions(config)
        if actions.size and (actions.min() < 0 or actions.max() >= n):
            raise UsageError(
                f"action index out of range for {self.env_id.value} (valid: 0..{n - 1})"
            )
        return actions.astype(np.int64)
