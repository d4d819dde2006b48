"""Cart-pole balancing, Euler-integrated as in the classic Barto-Sutton-Anderson model."""

import math
from typing import Tuple

import numpy as np

from .base import BaseEnvironment, EnvConfig, EnvId

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
FORCE_MAG = 10.0
TAU = 0.02

THETA_THRESHOLD = 12 * 2 * math.pi / 360
X_THRESHOLD = 2.4


class CartPoleEnvironment(BaseEnvironment):
    """State (x, x_dot, theta, theta_dot); actions {0: push left, 1: push right}.

    ``pole_length`` is the half-length used by the standard equations.
    """

    env_id = EnvId.CARTPOLE
    state_dim = 4
    obs_dim = 4

    def n_actions(self, config: EnvConfig) -> int:
        return 2

    def sample_initial(self, rng: np.random.Generator, config: EnvConfig) -> np.ndarray:
        return rng.uniform(low=-0.05, high=0.05, size=4)

    def advance(
        self, states: np.ndarray, actions: np.ndarray, config: EnvConfig
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        length = config.pole_length
        polemass_length = MASS_POLE * length

        x, x_dot, theta, theta_dot = states.T
        force = np.where(actions == 1, FORCE_MAG, -FORCE_MAG)
        costheta = np.cos(theta)
        sintheta = np.sin(theta)

        temp = (force + polemass_length * theta_dot**2 * sintheta) / TOTAL_MASS
        thetaacc = (GRAVITY * sintheta - costheta * temp) / (
            length * (4.0 / 3.0 - MASS_POLE * costheta**2 / TOTAL_MASS)
        )
        xacc = temp - polemass_length * thetaacc * costheta / TOTAL_MASS

        x = x + TAU * x_dot
        x_dot = x_dot + TAU * xacc
        theta = theta + TAU * theta_dot
        theta_dot = theta_dot + TAU * thetaacc

        next_states = np.stack([x, x_dot, theta, theta_dot], axis=1)
        terminal = (np.abs(x) > X_THRESHOLD) | (np.abs(theta) > THETA_THRESHOLD)
        # +1 for every step taken, the failing one included
        rewards = np.ones(len(states))
        return next_states, rewards, terminal

    def observe(self, states: np.ndarray, config: EnvConfig) -> np.ndarray:
        return np.array(states, dtype=np.float64, copy=True)
