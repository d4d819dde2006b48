"""Fitness of unified genomes as policies: greedy rollouts on each task's environment."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..environments import EnvConfig, get_environment
from ..utils.error_handler import ConfigurationError, EvaluationError, UsageError
from ..utils.logging_setup import get_logger
from .parallel_execution import ParallelExecutionManager
from .policy_net import Activation, Architecture, PolicyNetwork
from .seeding import derive_seed
from .unified_genome import PartitionMap, decode

logger = get_logger(__name__)

DEFAULT_FITNESS_EPISODES = 50
DEFAULT_TEST_EPISODES = 250


class SeedPolicy(str, Enum):
    """How fitness episode seeds are drawn.

    FIXED_SET: one seed block per generation shared by every candidate.
    PER_CALL: a block per (generation, candidate).
    """

    FIXED_SET = "fixed_set"
    PER_CALL = "per_call"


@dataclass(frozen=True)
class TaskSpec:
    """One RL task: environment and configuration, policy architecture, episode protocol."""

    task_index: int
    env_config: EnvConfig
    architecture: Architecture
    name: str = ""
    preset: str = ""
    n_fitness_episodes: int = DEFAULT_FITNESS_EPISODES
    n_test_episodes: int = DEFAULT_TEST_EPISODES
    episode_seed_policy: SeedPolicy = SeedPolicy.FIXED_SET

    def __post_init__(self):
        object.__setattr__(self, "episode_seed_policy", SeedPolicy(self.episode_seed_policy))
        if not self.name:
            default_name = f"{self.env_config.env_id.value}#{self.task_index}"
            object.__setattr__(self, "name", self.preset or default_name)
        self.validate()

    def validate(self) -> None:
        if self.n_fitness_episodes < 1:
            raise ConfigurationError(
                f"must be >= 1, got {self.n_fitness_episodes}", field_path="n_fitness_episodes"
            )
        if self.n_test_episodes < 1:
            raise ConfigurationError(
                f"must be >= 1, got {self.n_test_episodes}", field_path="n_test_episodes"
            )
        env = get_environment(self.env_config.env_id)
        expected = (env.obs_dim, env.n_actions(self.env_config))
        actual = (self.architecture.input_dim, self.architecture.output_dim)
        if actual != expected:
            raise ConfigurationError(
                f"architecture maps {actual[0]} -> {actual[1]} but {self.env_config.env_id.value} "
                f"needs {expected[0]} -> {expected[1]}",
                field_path="architecture.layer_sizes",
            )

    @classmethod
    def with_default_architecture(
        cls,
        task_index: int,
        env_config: EnvConfig,
        hidden: Sequence[int] = (16, 16, 8),
        activation: Activation = Activation.RELU,
        **kwargs,
    ) -> "TaskSpec":
        env = get_environment(env_config.env_id)
        arch = Architecture.default_for(env.obs_dim, env.n_actions(env_config), hidden, activation)
        return cls(task_index=task_index, env_config=env_config, architecture=arch, **kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "task_index": self.task_index,
            "name": self.name,
            "preset": self.preset,
            "env_config": self.env_config.to_dict(),
            "architecture": self.architecture.to_dict(),
            "n_fitness_episodes": self.n_fitness_episodes,
            "n_test_episodes": self.n_test_episodes,
            "episode_seed_policy": self.episode_seed_policy.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TaskSpec":
        data = dict(data)
        data["env_config"] = EnvConfig.from_dict(data["env_config"])
        data["architecture"] = Architecture.from_dict(data["architecture"])
        return cls(**data)


@dataclass
class EvalReport:
    """Test statistics in reward sign."""

    mean_reward: float
    std_reward: float
    per_episode_rewards: List[float] = field(repr=False)
    episodes_used: int = 0

    @classmethod
    def from_rewards(cls, rewards: np.ndarray) -> "EvalReport":
        rewards = np.asarray(rewards, dtype=np.float64)
        return cls(
            mean_reward=float(rewards.mean()),
            std_reward=float(rewards.std()),
            per_episode_rewards=rewards.tolist(),
            episodes_used=int(rewards.size),
        )


def episode_seeds(seed: int, n_episodes: int) -> List[int]:
    """Seeds of a block of episodes; episode i depends only on (seed, i)."""
    return [derive_seed(seed, "episode", i) for i in range(n_episodes)]


def run_episodes(task: TaskSpec, weights: np.ndarray, seeds: Sequence[int]) -> np.ndarray:
    """Total reward of one greedy episode per seed, all episodes stepped in lock-step."""
    config = task.env_config
    env = get_environment(config.env_id)
    policy = PolicyNetwork(task.architecture, weights)

    states = env.initial_states(seeds, config)
    totals = np.zeros(len(seeds))
    alive = np.ones(len(seeds), dtype=bool)
    for _ in range(config.episode_cap):
        live = np.flatnonzero(alive)
        if live.size == 0:
            break
        actions = policy.act_batch(env.observe(states[live], config))
        next_states, rewards, terminal = env.advance(states[live], actions, config)
        states[live] = next_states
        totals[live] += rewards
        alive[live] = ~terminal

    if not np.all(np.isfinite(totals)):
        raise EvaluationError(f"non-finite episode reward on task {task.name}")
    return totals


def fitness(genome: np.ndarray, task: TaskSpec, pmap: PartitionMap, seed: int) -> float:
    """Factorial objective: minus the mean total reward over the task's fitness episodes."""
    weights = decode(genome, task.task_index, pmap)
    rewards = run_episodes(task, weights, episode_seeds(seed, task.n_fitness_episodes))
    return -float(rewards.mean())


def test_model(
    genome: np.ndarray,
    task: TaskSpec,
    pmap: PartitionMap,
    n_episodes: Optional[int] = None,
    seed: int = 0,
) -> EvalReport:
    """Held-out statistics over ``n_episodes`` (default: the task's test count)."""
    n_episodes = task.n_test_episodes if n_episodes is None else n_episodes
    if n_episodes < 1:
        raise UsageError(f"n_episodes must be >= 1, got {n_episodes}")
    weights = decode(genome, task.task_index, pmap)
    return EvalReport.from_rewards(run_episodes(task, weights, episode_seeds(seed, n_episodes)))


# keep pytest from collecting it when imported into test modules
test_model.__test__ = False


def _rollout_job(job: Tuple[TaskSpec, np.ndarray, int]) -> float:
    task, weights, seed = job
    return -float(run_episodes(task, weights, episode_seeds(seed, task.n_fitness_episodes)).mean())


class RLMultitaskEvaluator:
    """Scores genomes on RL tasks through the unified genome map."""

    def __init__(
        self,
        tasks: Sequence[TaskSpec],
        pmap: PartitionMap,
        base_seed: int,
        executor: Optional[ParallelExecutionManager] = None,
    ):
        if len(tasks) != pmap.n_tasks:
            raise ConfigurationError(
                f"{len(tasks)} tasks but the partition map covers {pmap.n_tasks}", field_path="tasks"
            )
        for index, task in enumerate(tasks):
            if task.task_index != index:
                raise ConfigurationError(
                    f"task at position {index} has task_index {task.task_index}",
                    field_path=f"tasks.{index}",
                )
        self.tasks = list(tasks)
        self.pmap = pmap
        self.base_seed = base_seed
        self.executor = executor or ParallelExecutionManager(1)
        self.n_tasks = pmap.n_tasks
        self.dimension = pmap.total_dim

    def episode_block_seed(self, generation: int, candidate: int, task: TaskSpec) -> int:
        if task.episode_seed_policy is SeedPolicy.PER_CALL:
            return derive_seed(self.base_seed, "fitness", generation, candidate)
        return derive_seed(self.base_seed, "fitness", generation)

    def evaluate(self, genomes: np.ndarray, task_indices: np.ndarray, generation: int) -> np.ndarray:
        jobs = []
        for i, (genome, k) in enumerate(zip(genomes, task_indices)):
            task = self.tasks[int(k)]
            policy = decode(genome, task.task_index, self.pmap)
            jobs.append((task, policy, self.episode_block_seed(generation, i, task)))
        costs = np.asarray(self.executor.map(_rollout_job, jobs), dtype=np.float64)
        logger.debug("batch_evaluated", generation=generation, evaluations=len(jobs))
        return costs


class ShiftedSphereEvaluator:
    """Synthetic tasks f_k(x) = sum_i (x_i - c_k)^2 over the whole unified vector."""

    def __init__(self, centers: Sequence[float], dimension: int):
        self.centers = np.asarray(centers, dtype=np.float64)
        self.n_tasks = len(self.centers)
        self.dimension = dimension
        self.calls: List[int] = []

    def evaluate(self, genomes: np.ndarray, task_indices: np.ndarray, generation: int) -> np.ndarray:
        genomes = np.asarray(genomes, dtype=np.float64)
        self.calls.append(len(genomes))
        shift = self.centers[np.asarray(task_indices)][:, None]
        return np.sum((genomes - shift) ** 2, axis=1)
