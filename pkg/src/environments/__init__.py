"""Deterministic classic-control environments: cartpole, acrobot, pendulum."""

from typing import Dict, Tuple

import numpy as np

from ..core.seeding import make_rng
from ..utils.error_handler import UsageError
from .acrobot import AcrobotEnvironment
from .base import BaseEnvironment, EnvConfig, EnvId, EnvState, StepResult
from .cartpole import CartPoleEnvironment
from .pendulum import PendulumEnvironment

_REGISTRY: Dict[EnvId, BaseEnvironment] = {
    EnvId.CARTPOLE: CartPoleEnvironment(),
    EnvId.ACROBOT: AcrobotEnvironment(),
    EnvId.PENDULUM: PendulumEnvironment(),
}


def get_environment(env_id) -> BaseEnvironment:
    """Environment dynamics for an id (enum or its string value)."""
    return _REGISTRY[EnvId(env_id)]


def reset(config: EnvConfig, seed: int) -> Tuple[EnvState, np.ndarray]:
    """Initial state and observation; same seed gives the same state bit-for-bit."""
    config.validate()
    env = get_environment(config.env_id)
    values = env.sample_initial(make_rng(seed), config)
    state = EnvState(config.env_id, tuple(float(v) for v in values), 0)
    return state, observation_of(state, config)


def step(state: EnvState, action: int, config: EnvConfig) -> Tuple[EnvState, StepResult]:
    """Advance one control step."""
    if state.env_id != config.env_id:
        raise UsageError(
            f"state belongs to {state.env_id.value}, config to {config.env_id.value}"
        )
    env = get_environment(config.env_id)
    actions = env.check_actions(np.array([action]), config)
    next_values, rewards, terminal = env.advance(state.as_array()[None, :], actions, config)

    next_state = EnvState(
        config.env_id, tuple(float(v) for v in next_values[0]), state.step_count + 1
    )
    done = bool(terminal[0]) or next_state.step_count >= config.episode_cap
    result = StepResult(
        observation=observation_of(next_state, config),
        reward=float(rewards[0]),
        done=done,
    )
    return next_state, result


def observation_of(state: EnvState, config: EnvConfig) -> np.ndarray:
    """Environment-specific observation vector for a state."""
    env = get_environment(config.env_id)
    return env.observe(state.as_array()[None, :], config)[0]


__all__ = [
    "AcrobotEnvironment",
    "BaseEnvironment",
    "CartPoleEnvironment",
    "EnvConfig",
    "EnvId",
    "EnvState",
    "PendulumEnvironment",
    "StepResult",
    "get_environment",
    "observation_of",
    "reset",
    "step",
]
