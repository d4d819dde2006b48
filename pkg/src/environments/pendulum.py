"""Inverted pendulum swing-up with a discretized torque action set."""

import math
from typing import Tuple

import numpy as np

from .base import BaseEnvironment, EnvConfig, EnvId

GRAVITY = 10.0
MASS = 1.0
LENGTH = 1.0
DT = 0.05


def angle_normalize(x: np.ndarray) -> np.ndarray:
    """Representative of the angle in [-pi, pi)."""
    return ((x + math.pi) % (2 * math.pi)) - math.pi


def torque_levels(config: EnvConfig) -> np.ndarray:
    """Evenly spaced torques over [-max_torque, +max_torque]; the middle bin is zero."""
    return np.linspace(-config.max_torque, config.max_torque, config.torque_bins)


class PendulumEnvironment(BaseEnvironment):
    """State (theta, theta_dot) with theta = 0 upright; semi-implicit Euler."""

    env_id = EnvId.PENDULUM
    state_dim = 2
    obs_dim = 3

    def n_actions(self, config: EnvConfig) -> int:
        return config.torque_bins

    def sample_initial(self, rng: np.random.Generator, config: EnvConfig) -> np.ndarray:
        return rng.uniform(low=[-math.pi, -1.0], high=[math.pi, 1.0])

    def advance(
        self, states: np.ndarray, actions: np.ndarray, config: EnvConfig
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        th, thdot = states.T
        u = np.clip(torque_levels(config)[actions], -config.max_torque, config.max_torque)

        costs = angle_normalize(th) ** 2 + 0.1 * thdot**2 + 0.001 * u**2

        newthdot = thdot + (
            3 * GRAVITY / (2 * LENGTH) * np.sin(th) + 3.0 / (MASS * LENGTH**2) * u
        ) * DT
        newthdot = np.clip(newthdot, -config.max_speed, config.max_speed)
        newth = th + newthdot * DT

        next_states = np.stack([newth, newthdot], axis=1)
        terminal = np.zeros(len(states), dtype=bool)
        return next_states, -costs, terminal

    def observe(self, states: np.ndarray, config: EnvConfig) -> np.ndarray:
        th, thdot = states.T
        return np.stack([np.cos(th), np.sin(th), thdot], axis=1)

    @staticmethod
    def mechanical_energy(states: np.ndarray, config: EnvConfig) -> np.ndarray:
        """Energy of a uniform rod pivoted at one end; zero height at the pivot."""
        states = np.atleast_2d(states)
        th, thdot = states.T
        inertia = MASS * LENGTH**2 / 3.0
        return 0.5 * inertia * thdot**2 + MASS * GRAVITY * LENGTH / 2.0 * np.cos(th)
