"""Tests for genome fitness, held-out testing and the multitask evaluator."""

import numpy as np
import pytest

from src.core.evaluator import (
    EvalReport,
    RLMultitaskEvaluator,
    SeedPolicy,
    TaskSpec,
    episode_seeds,
    fitness,
    run_episodes,
    test_model,
)
from src.core.parallel_execution import ParallelExecutionManager, resolve_workers
from src.core.policy_net import Architecture
from src.core.unified_genome import build_partition_map, decode, random_genome
from src.environments import EnvConfig, EnvId, reset, step
from src.utils.error_handler import ConfigurationError, UsageError


def _scripted_total(config, seed, action):
    """Total reward of one episode that always plays ``action``."""
    state, _ = reset(config, seed)
    total = 0.0
    while True:
        state, result = step(state, action, config)
        total += result.reward
        if result.done:
            return total


@pytest.mark.unit
class TestTaskSpec:
    """Test task validation."""

    def test_default_name_from_preset(self, small_tasks):
        assert small_tasks[0].name == "cartpole:A"

    def test_architecture_must_match_environment(self):
        with pytest.raises(ConfigurationError) as excinfo:
            TaskSpec(0, EnvConfig(EnvId.CARTPOLE), Architecture((3, 4, 2)))
        assert excinfo.value.field_path == "architecture.layer_sizes"

    def test_episode_counts_positive(self):
        with pytest.raises(ConfigurationError):
            TaskSpec.with_default_architecture(0, EnvConfig(EnvId.CARTPOLE), n_fitness_episodes=0)

    def test_pendulum_actions_follow_torque_bins(self):
        spec = TaskSpec.with_default_architecture(0, EnvConfig(EnvId.PENDULUM, torque_bins=7))
        assert spec.architecture.output_dim == 7

    def test_dict_round_trip(self, small_tasks):
        for task in small_tasks:
            assert TaskSpec.from_dict(task.to_dict()) == task


@pytest.mark.unit
class TestEpisodes:
    """Test batched rollouts against single-episode stepping."""

    def test_seed_block_deterministic(self):
        assert episode_seeds(5, 4) == episode_seeds(5, 4)
        assert episode_seeds(5, 4)[:2] == episode_seeds(5, 2)

    def test_zero_weights_pendulum_matches_scripted(self):
        """Test a zero-weight policy always plays bin 0 (the most negative torque)."""
        task = TaskSpec.with_default_architecture(0, EnvConfig(EnvId.PENDULUM, max_steps=40))
        seeds = episode_seeds(11, 5)
        rewards = run_episodes(task, np.zeros(task.architecture.parameter_count), seeds)
        expected = [_scripted_total(task.env_config, s, 0) for s in seeds]
        np.testing.assert_allclose(rewards, expected, rtol=1e-12)

    def test_cartpole_reward_bounds(self, small_tasks, rng):
        task = small_tasks[0]
        for _ in range(5):
            weights = rng.uniform(-4, 4, size=task.architecture.parameter_count)
            rewards = run_episodes(task, weights, episode_seeds(1, 10))
            assert np.all((rewards >= 1) & (rewards <= task.env_config.episode_cap))

    def test_acrobot_reward_bounds(self, rng):
        task = TaskSpec.with_default_architecture(0, EnvConfig(EnvId.ACROBOT, max_steps=60), hidden=(4, 4))
        params = rng.uniform(-4, 4, size=task.architecture.parameter_count)
        rewards = run_episodes(task, params, episode_seeds(2, 6))
        assert np.all((rewards >= -60) & (rewards <= -1))

    def test_permuting_seeds_permutes_rewards(self, small_tasks, rng):
        task = small_tasks[1]
        weights = rng.uniform(-4, 4, size=task.architecture.parameter_count)
        seeds = episode_seeds(3, 6)
        forward = run_episodes(task, weights, seeds)
        backward = run_episodes(task, weights, seeds[::-1])
        np.testing.assert_allclose(forward, backward[::-1])


@pytest.mark.unit
class TestFitnessAndTest:
    """Test the factorial objective and held-out reports."""

    def test_cartpole_fitness_range(self, small_tasks, small_pmap):
        genome = random_genome(small_pmap, 4)
        value = fitness(genome, small_tasks[0], small_pmap, seed=1)
        assert -30.0 <= value <= -1.0

    def test_fitness_deterministic(self, small_tasks, small_pmap):
        genome = random_genome(small_pmap, 4)
        first = fitness(genome, small_tasks[1], small_pmap, 9)
        assert first == fitness(genome, small_tasks[1], small_pmap, 9)

    def test_sign_convention(self, small_tasks, small_pmap):
        """Test fitness is minus the test mean on the same seed block and episode count."""
        genome = random_genome(small_pmap, 5)
        task = small_tasks[1]
        report = test_model(genome, task, small_pmap, task.n_fitness_episodes, seed=21)
        assert fitness(genome, task, small_pmap, 21) == -report.mean_reward

    def test_single_episode_report(self, small_tasks, small_pmap):
        report = test_model(random_genome(small_pmap, 6), small_tasks[0], small_pmap, 1, seed=2)
        assert report.episodes_used == 1
        assert report.std_reward == 0.0
        assert report.per_episode_rewards == [report.mean_reward]

    def test_default_episode_count(self, small_tasks, small_pmap):
        report = test_model(random_genome(small_pmap, 6), small_tasks[0], small_pmap)
        assert report.episodes_used == small_tasks[0].n_test_episodes

    def test_report_within_cap(self, small_tasks, small_pmap):
        report = test_model(random_genome(small_pmap, 7), small_tasks[0], small_pmap, 20, seed=3)
        assert report.mean_reward <= small_tasks[0].env_config.episode_cap

    def test_invalid_episode_count(self, small_tasks, small_pmap):
        with pytest.raises(UsageError):
            test_model(random_genome(small_pmap, 7), small_tasks[0], small_pmap, 0)

    def test_disjoint_blocks_agree(self, small_pmap):
        """Test means over disjoint episode blocks agree within two standard errors most of the time."""
        task = TaskSpec.with_default_architecture(
            1, EnvConfig(EnvId.PENDULUM, max_steps=20), hidden=(4, 4), preset="pendulum:A"
        )
        genome = random_genome(small_pmap, 8)
        agreements = 0
        for trial in range(20):
            a = test_model(genome, task, small_pmap, 250, seed=2 * trial)
            b = test_model(genome, task, small_pmap, 250, seed=2 * trial + 1)
            scale = np.hypot(a.std_reward, b.std_reward) / np.sqrt(250)
            agreements += abs(a.mean_reward - b.mean_reward) <= 2.0 * scale
        assert agreements >= 16

    def test_report_from_rewards(self):
        report = EvalReport.from_rewards(np.array([1.0, 3.0]))
        assert report.mean_reward == 2.0
        assert report.std_reward == 1.0
        assert report.episodes_used == 2


@pytest.mark.unit
class TestRLMultitaskEvaluator:
    """Test the evaluator the MFEA engine talks to."""

    def test_costs_match_fitness(self, small_tasks, small_pmap):
        """Test each cost equals fitness() under the generation's shared seed block."""
        evaluator = RLMultitaskEvaluator(small_tasks, small_pmap, base_seed=17)
        genomes = np.stack([random_genome(small_pmap, s) for s in range(4)])
        tasks = np.array([0, 1, 1, 0])
        costs = evaluator.evaluate(genomes, tasks, generation=3)
        for i, (genome, k) in enumerate(zip(genomes, tasks)):
            seed = evaluator.episode_block_seed(3, i, small_tasks[k])
            assert costs[i] == pytest.approx(fitness(genome, small_tasks[k], small_pmap, seed))

    def test_fixed_set_shares_block(self, small_tasks, small_pmap):
        evaluator = RLMultitaskEvaluator(small_tasks, small_pmap, base_seed=1)
        seed = evaluator.episode_block_seed(2, 0, small_tasks[0])
        assert seed == evaluator.episode_block_seed(2, 5, small_tasks[0])
        assert seed != evaluator.episode_block_seed(3, 0, small_tasks[0])

    def test_per_call_varies_by_candidate(self, small_tasks, small_pmap):
        per_call = TaskSpec.from_dict({**small_tasks[0].to_dict(), "episode_seed_policy": "per_call"})
        assert per_call.episode_seed_policy is SeedPolicy.PER_CALL
        evaluator = RLMultitaskEvaluator([per_call, small_tasks[1]], small_pmap, base_seed=1)
        assert evaluator.episode_block_seed(2, 0, per_call) != evaluator.episode_block_seed(2, 1, per_call)

    def test_identical_genomes_identical_costs(self, small_tasks, small_pmap):
        """Test the fixed seed block makes fitness a pure function of the genome."""
        evaluator = RLMultitaskEvaluator(small_tasks, small_pmap, base_seed=2)
        genome = random_genome(small_pmap, 0)
        costs = evaluator.evaluate(np.stack([genome] * 3), np.array([1, 1, 1]), generation=0)
        assert costs[0] == costs[1] == costs[2]

    def test_task_count_must_match_map(self, small_tasks):
        pmap = build_partition_map([small_tasks[0].architecture], shared_layers=1)
        with pytest.raises(ConfigurationError):
            RLMultitaskEvaluator(small_tasks, pmap, base_seed=0)

    def test_worker_count_does_not_change_costs(self, small_tasks, small_pmap):
        genomes = np.stack([random_genome(small_pmap, s) for s in range(6)])
        tasks = np.array([0, 1, 0, 1, 0, 1])
        serial = RLMultitaskEvaluator(small_tasks, small_pmap, base_seed=4).evaluate(genomes, tasks, 1)
        with ParallelExecutionManager(2) as executor:
            parallel = RLMultitaskEvaluator(small_tasks, small_pmap, base_seed=4, executor=executor).evaluate(
                genomes, tasks, 1
            )
        np.testing.assert_array_equal(serial, parallel)


@pytest.mark.unit
class TestParallelExecution:
    """Test the ordered process-pool map."""

    def test_resolve_workers(self, mocker):
        mocker.patch("src.core.parallel_execution.os.cpu_count", return_value=6)
        assert resolve_workers(None) == 6
        assert resolve_workers(0) == 6
        assert resolve_workers(3) == 3
        with pytest.raises(ConfigurationError):
            resolve_workers(-1)

    def test_in_process_map_keeps_order(self):
        manager = ParallelExecutionManager(1)
        assert manager.map(abs, [-3, 1, -2]) == [3, 1, 2]
        summary = manager.get_execution_summary()
        assert summary["batches"] == 1
        assert summary["items"] == 3

    def test_pool_map_keeps_order(self):
        with ParallelExecutionManager(2) as manager:
            assert manager.map(abs, list(range(-10, 0))) == list(range(10, 0, -1))
