"""Test configuration and fixtures for MFEA-RL."""

import json
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from src.core.evaluator import TaskSpec
from src.core.policy_net import Architecture
from src.core.unified_genome import build_partition_map
from src.environments import EnvConfig, EnvId


@pytest.fixture
def cli_runner():
    """Provide CLI test runner."""
    return CliRunner()


@pytest.fixture
def temp_dir():
    """Provide temporary directory for tests."""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture
def rng():
    """Seeded generator for randomized property checks."""
    return np.random.default_rng(12345)


@pytest.fixture
def cartpole_config():
    return EnvConfig(EnvId.CARTPOLE, pole_length=0.5)


@pytest.fixture
def acrobot_config():
    return EnvConfig(EnvId.ACROBOT, joint_length=1.0)


@pytest.fixture
def pendulum_config():
    return EnvConfig(EnvId.PENDULUM, max_speed=8.0, max_torque=2.0)


@pytest.fixture
def small_tasks():
    """Cartpole and pendulum tasks with short episodes and a 4-4 hidden network."""
    return [
        TaskSpec.with_default_architecture(
            0,
            EnvConfig(EnvId.CARTPOLE, pole_length=0.5, max_steps=30),
            hidden=(4, 4),
            preset="cartpole:A",
            n_fitness_episodes=3,
            n_test_episodes=4,
        ),
        TaskSpec.with_default_architecture(
            1,
            EnvConfig(EnvId.PENDULUM, max_speed=8.0, max_torque=2.0, max_steps=20),
            hidden=(4, 4),
            preset="pendulum:A",
            n_fitness_episodes=3,
            n_test_episodes=4,
        ),
    ]


@pytest.fixture
def small_pmap(small_tasks):
    return build_partition_map([t.architecture for t in small_tasks], shared_layers=2)


@pytest.fixture
def toy_architectures():
    """Layer parameter counts [6, 4] and [8, 4]."""
    return [Architecture((1, 3, 1)), Architecture((7, 1, 2))]


@pytest.fixture
def tiny_experiment():
    """Raw config for a two-task experiment that finishes in seconds."""
    return {
        "name": "tiny",
        "base_seed": 3,
        "runs": 2,
        "checkpoint_every": 1,
        "tasks": [
            {"preset": "cartpole:A", "max_steps": 15, "n_fitness_episodes": 2, "n_test_episodes": 3},
            {"preset": "cartpole:B", "max_steps": 15, "n_fitness_episodes": 2, "n_test_episodes": 3},
        ],
        "architecture": {"hidden": [4, 4], "shared_layers": 2},
        "mfea": {"population_size": 8, "generations": 2},
    }


@pytest.fixture
def tiny_config_file(temp_dir, tiny_experiment):
    """The tiny experiment written as JSON."""
    path = temp_dir / "tiny.json"
    path.write_text(json.dumps(tiny_experiment), encoding="utf-8")
    return path
