"""Full-budget reproduction checks on the bundled configs (minutes each; run with -m slow)."""

from pathlib import Path

import pandas as pd
import pytest

from src.harness.emitters import compare_summaries
from src.harness.experiment_config import load_config
from src.harness.runner import run_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

pytestmark = [pytest.mark.slow, pytest.mark.acceptance]


def _run(temp_dir, relative, **overrides):
    config = load_config(CONFIGS / relative, {"runs": 1, **overrides})
    out = temp_dir / config.name
    run_experiment(config, output_dir=out, workers=0)
    return out


def _test_reward(out, task):
    summary = pd.read_csv(out / "summary.csv").set_index("task")
    return summary.loc[task, "mean_reward"]


class TestSingleTask:
    """Single-task runs reach the target reward levels."""

    def test_cartpole_b(self, temp_dir):
        out = _run(temp_dir, "single_task/cartpole_b.json")
        assert _test_reward(out, "cartpole:B") >= 290
        curves = pd.read_csv(out / "curves_run1.csv")
        assert curves[curves["generation"] <= 15]["best_reward"].max() >= 295

    def test_acrobot_b(self, temp_dir):
        out = _run(temp_dir, "single_task/acrobot_b.json")
        assert _test_reward(out, "acrobot:B") >= -110

    def test_pendulum_b(self, temp_dir):
        """Pendulum reaches the threshold and is still improving after generation 10."""
        out = _run(temp_dir, "single_task/pendulum_b.json")
        assert _test_reward(out, "pendulum:B") >= -400
        best = pd.read_csv(out / "curves_run1.csv").set_index("generation")["best_reward"]
        assert best.max() > best.loc[10]


class TestMultitask:
    """Joint runs keep every task solved and log transfer."""

    def test_intra_cartpole(self, temp_dir):
        out = _run(temp_dir, "intra_environment/cartpole.json")
        summary = pd.read_csv(out / "summary.csv")
        assert (summary["mean_reward"] >= 230).all()

    def test_inter_environment_shape(self, temp_dir):
        out = _run(temp_dir, "inter_environment.json")
        matrix = pd.read_csv(out / "transfer_run1.csv").drop(columns="donor")
        assert matrix.shape == (9, 9)
        values = matrix.to_numpy().ravel()
        defined = values[~pd.isna(values)]
        assert ((defined >= 0) & (defined <= 1)).all()
        scopes = pd.read_csv(out / "transfer_summary_run1.csv").set_index("scope")
        assert scopes.loc["intra_environment", "events"] > 0

    def test_pendulum_degrades_more_than_cartpole(self, temp_dir):
        """Joint evolution costs pendulum more, relative to its single-task runs, than cartpole."""
        mean_degradation = {}
        for env in ("cartpole", "pendulum"):
            joint = pd.read_csv(_run(temp_dir, f"intra_environment/{env}.json") / "summary.csv")
            separate = pd.concat(
                [
                    pd.read_csv(_run(temp_dir, f"single_task/{env}_{letter}.json") / "summary.csv")
                    for letter in "abcd"
                ],
                ignore_index=True,
            )
            comparison = compare_summaries(separate, joint)
            assert len(comparison) == 4
            mean_degradation[env] = comparison["relative_degradation"].mean()
        assert mean_degradation["pendulum"] > mean_degradation["cartpole"]
