"""Two-link acrobot swing-up with RK4 integration of the frictionless model."""

import math
from typing import Tuple

import numpy as np

from .base import BaseEnvironment, EnvConfig, EnvId

GRAVITY = 9.8
DT = 0.2
LINK_MOI = 1.0
MAX_VEL_1 = 4 * math.pi
MAX_VEL_2 = 9 * math.pi
AVAIL_TORQUE = np.array([-1.0, 0.0, 1.0])


class LinkParameters:
    """Link lengths, masses and centres of mass scaled by ``joint_length``."""

    def __init__(self, joint_length: float):
        self.l1 = joint_length
        self.m1 = joint_length
        self.m2 = joint_length
        self.lc1 = joint_length / 2.0
        self.lc2 = joint_length / 2.0
        self.i1 = LINK_MOI
        self.i2 = LINK_MOI


def _dsdt(s: np.ndarray, torque: np.ndarray, p: LinkParameters) -> np.ndarray:
    theta1, theta2, dtheta1, dtheta2 = s.T
    cos2 = np.cos(theta2)
    sin2 = np.sin(theta2)

    d1 = p.m1 * p.lc1**2 + p.m2 * (p.l1**2 + p.lc2**2 + 2 * p.l1 * p.lc2 * cos2) + p.i1 + p.i2
    d2 = p.m2 * (p.lc2**2 + p.l1 * p.lc2 * cos2) + p.i2
    phi2 = p.m2 * p.lc2 * GRAVITY * np.cos(theta1 + theta2 - math.pi / 2.0)
    phi1 = (
        -p.m2 * p.l1 * p.lc2 * dtheta2**2 * sin2
        - 2 * p.m2 * p.l1 * p.lc2 * dtheta2 * dtheta1 * sin2
        + (p.m1 * p.lc1 + p.m2 * p.l1) * GRAVITY * np.cos(theta1 - math.pi / 2.0)
        + phi2
    )
    ddtheta2 = (
        torque + d2 / d1 * phi1 - p.m2 * p.l1 * p.lc2 * dtheta1**2 * sin2 - phi2
    ) / (p.m2 * p.lc2**2 + p.i2 - d2**2 / d1)
    ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
    return np.stack([dtheta1, dtheta2, ddtheta1, ddtheta2], axis=1)


def rk4_step(s: np.ndarray, torque: np.ndarray, p: LinkParameters, dt: float = DT) -> np.ndarray:
    """One classical Runge-Kutta step of length ``dt``."""
    k1 = _dsdt(s, torque, p)
    k2 = _dsdt(s + dt / 2.0 * k1, torque, p)
    k3 = _dsdt(s + dt / 2.0 * k2, torque, p)
    k4 = _dsdt(s + dt * k3, torque, p)
    return s + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def wrap_angle(x: np.ndarray) -> np.ndarray:
    """Map angles into [-pi, pi)."""
    return (x + math.pi) % (2 * math.pi) - math.pi


class AcrobotEnvironment(BaseEnvironment):
    """State (theta1, theta2, dtheta1, dtheta2); torque {-1, 0, +1} on the second joint."""

    env_id = EnvId.ACROBOT
    state_dim = 4
    obs_dim = 6

    def n_actions(self, config: EnvConfig) -> int:
        return len(AVAIL_TORQUE)

    def sample_initial(self, rng: np.random.Generator, config: EnvConfig) -> np.ndarray:
        return rng.uniform(low=-0.1, high=0.1, size=4)

    def advance(
        self, states: np.ndarray, actions: np.ndarray, config: EnvConfig
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        params = LinkParameters(config.joint_length)
        torque = AVAIL_TORQUE[actions]
        ns = rk4_step(states, torque, params)

        ns[:, 0] = wrap_angle(ns[:, 0])
        ns[:, 1] = wrap_angle(ns[:, 1])
        ns[:, 2] = np.clip(ns[:, 2], -MAX_VEL_1, MAX_VEL_1)
        ns[:, 3] = np.clip(ns[:, 3], -MAX_VEL_2, MAX_VEL_2)

        terminal = -np.cos(ns[:, 0]) - np.cos(ns[:, 1] + ns[:, 0]) > 1.0
        # -1 for every step taken, the goal step included
        rewards = -np.ones(len(states))
        return ns, rewards, terminal

    def observe(self, states: np.ndarray, config: EnvConfig) -> np.ndarray:
        theta1, theta2, dtheta1, dtheta2 = states.T
        return np.stack(
            [np.cos(theta1), np.sin(theta1), np.cos(theta2), np.sin(theta2), dtheta1, dtheta2],
            axis=1,
        )

    @staticmethod
    def mechanical_energy(states: np.ndarray, config: EnvConfig) -> np.ndarray:
        """Kinetic plus potential energy; the zero of height is the pivot."""
        p = LinkParameters(config.joint_length)
        states = np.atleast_2d(states)
        theta1, theta2, dtheta1, dtheta2 = states.T
        d11 = (
            p.m1 * p.lc1**2
            + p.m2 * (p.l1**2 + p.lc2**2 + 2 * p.l1 * p.lc2 * np.cos(theta2))
            + p.i1
            + p.i2
        )
        d12 = p.m2 * (p.lc2**2 + p.l1 * p.lc2 * np.cos(theta2)) + p.i2
        d22 = p.m2 * p.lc2**2 + p.i2
        kinetic = 0.5 * d11 * dtheta1**2 + d12 * dtheta1 * dtheta2 + 0.5 * d22 * dtheta2**2
        potential = -GRAVITY * (
            (p.m1 * p.lc1 + p.m2 * p.l1) * np.cos(theta1)
            + p.m2 * p.lc2 * np.cos(theta1 + theta2)
        )
        return kinetic + potential
