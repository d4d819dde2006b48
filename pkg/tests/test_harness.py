"""Integration tests for experiment runs, artifacts, checkpoints and resume."""

import json

import pandas as pd
import pytest

from src.core.checkpoint import MANIFEST as CHECKPOINT_MANIFEST
from src.core.checkpoint import load_checkpoint, save_checkpoint
from src.core.mfea import MfeaEngine
from src.core.parallel_execution import ParallelExecutionManager
from src.core.unified_genome import load_genomes
from src.harness.experiment_config import config_hash, validate_config
from src.harness.runner import ExperimentRunner, resume_experiment, run_experiment, run_seed
from src.utils.error_handler import ArtifactError, EvaluationError

RUN_FILES = [
    "curves_run{r}.csv",
    "events_run{r}.csv",
    "transfer_run{r}.csv",
    "transfer_summary_run{r}.csv",
    "test_run{r}.csv",
]
AGGREGATES = ["summary.csv", "summary_grid.csv", "curves_long.csv", "curves_aggregate.csv"]


def _csv_bytes(directory):
    return {path.name: path.read_bytes() for path in sorted(directory.glob("*.csv"))}


@pytest.fixture
def tiny_run(temp_dir, tiny_experiment):
    """A finished two-run experiment."""
    config = validate_config(tiny_experiment)
    out = temp_dir / "first"
    manifest = run_experiment(config, output_dir=out, workers=1)
    return config, out, manifest


@pytest.mark.integration
class TestRunExperiment:
    """Test a full experiment run."""

    def test_artifacts_written(self, tiny_run):
        config, out, manifest = tiny_run
        assert manifest == out / "manifest.json"
        for r in (1, 2):
            for pattern in RUN_FILES:
                assert (out / pattern.format(r=r)).exists()
            assert (out / "best_genomes" / f"run{r}.bin").exists()
            assert (out / "checkpoints" / f"run{r}" / CHECKPOINT_MANIFEST).exists()
        for name in AGGREGATES:
            assert (out / name).exists()

    def test_manifest_contents(self, tiny_run):
        """Test the manifest echoes config, hash, seeds and the evaluation budget."""
        config, out, manifest_path = tiny_run
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        assert manifest["config_hash"] == config_hash(config)
        assert manifest["seeds"] == {"1": run_seed(3, 1), "2": run_seed(3, 2)}
        assert manifest["partial"] is False
        assert manifest["unified_dimension"] == config.partition_map().total_dim
        assert manifest["reference_unified_dimension"] == 962
        for entry in manifest["runs"]:
            assert entry["status"] == "complete"
            assert entry["initial_evaluations"] == 8 * 2
            assert entry["offspring_evaluations"] == 2 * 8
            assert entry["evaluations"] == 8 * 2 + 2 * 8
            assert entry["crossover_events"] == 2 * entry["crossover_matings"]
        assert set(manifest["versions"]) >= {"mfea_rl", "python", "numpy", "pandas"}

    def test_summary_rows(self, tiny_run):
        _, out, _ = tiny_run
        summary = pd.read_csv(out / "summary.csv")
        assert summary["task"].tolist() == ["cartpole:A", "cartpole:B"]
        assert (summary["runs"] == 2).all()
        assert summary["mean_reward"].between(1, 15).all()
        grid = pd.read_csv(out / "summary_grid.csv")
        assert grid["environment"].tolist() == ["cartpole"]
        assert {"A_mean", "A_std", "B_mean", "B_std"} <= set(grid.columns)

    def test_curve_rows(self, tiny_run):
        """Test one curve row per generation (initial included) and task."""
        _, out, _ = tiny_run
        curves = pd.read_csv(out / "curves_run1.csv")
        assert len(curves) == 3 * 2
        assert len(pd.read_csv(out / "curves_long.csv")) == 2 * 3 * 2

    def test_transfer_cells_bounded(self, tiny_run):
        _, out, _ = tiny_run
        matrix = pd.read_csv(out / "transfer_run1.csv").drop(columns="donor")
        values = matrix.to_numpy().ravel()
        values = values[~pd.isna(values)]
        assert ((values >= 0) & (values <= 1)).all()

    def test_best_genomes_block(self, tiny_run):
        config, out, _ = tiny_run
        genomes, pmap, metadata = load_genomes(out / "best_genomes" / "run1.bin")
        assert genomes.shape == (2, pmap.total_dim)
        assert [t["preset"] for t in metadata["tasks"]] == ["cartpole:A", "cartpole:B"]
        assert metadata["seed"] == run_seed(config.base_seed, 1)

    def test_byte_identical_rerun(self, tiny_run, temp_dir):
        """Test the same config and seed reproduce every CSV byte for byte."""
        config, out, _ = tiny_run
        again = temp_dir / "second"
        run_experiment(config, output_dir=again, workers=1)
        assert _csv_bytes(again) == _csv_bytes(out)

    def test_worker_count_irrelevant(self, tiny_run, temp_dir):
        """Test two worker processes give the same artifacts as one."""
        config, out, _ = tiny_run
        parallel = temp_dir / "parallel"
        run_experiment(config, output_dir=parallel, workers=2)
        assert _csv_bytes(parallel) == _csv_bytes(out)

    def test_single_task_transfer_matrix(self, temp_dir, tiny_experiment):
        tiny_experiment["tasks"] = tiny_experiment["tasks"][:1]
        tiny_experiment["runs"] = 1
        out = temp_dir / "single"
        run_experiment(validate_config(tiny_experiment), output_dir=out, workers=1)
        matrix = pd.read_csv(out / "transfer_run1.csv")
        assert matrix.shape == (1, 2)
        summary = pd.read_csv(out / "transfer_summary_run1.csv").set_index("scope")
        assert summary.loc["inter_environment", "events"] == 0
        assert summary.loc["intra_environment", "events"] == 0

    def test_failed_run_flagged(self, temp_dir, tiny_experiment, mocker):
        """Test a failing run is recorded as partial in the manifest and re-raised."""
        mocker.patch.object(ExperimentRunner, "run_single", side_effect=EvaluationError("rollout diverged"))
        out = temp_dir / "failed"
        with pytest.raises(EvaluationError):
            run_experiment(validate_config(tiny_experiment), output_dir=out, workers=1)
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["partial"] is True
        assert manifest["runs"][0]["status"] == "failed"
        assert "rollout diverged" in manifest["runs"][0]["error"]

    @pytest.mark.parametrize("error", [KeyboardInterrupt(), FloatingPointError("overflow in tanh")])
    def test_any_interruption_flagged(self, temp_dir, tiny_experiment, mocker, error):
        """Test interrupts and numeric errors also leave a partial manifest behind."""
        mocker.patch.object(ExperimentRunner, "run_single", side_effect=error)
        out = temp_dir / "interrupted"
        with pytest.raises(type(error)):
            run_experiment(validate_config(tiny_experiment), output_dir=out, workers=1)
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["partial"] is True
        assert manifest["runs"][0]["status"] == "failed"
        assert manifest["runs"][0]["error"].startswith(type(error).__name__)

    def test_foreign_manifest_rejected(self, temp_dir, tiny_experiment):
        tiny_experiment["runs"] = 1
        out = temp_dir / "foreign"
        out.mkdir()
        (out / "manifest.json").write_text(json.dumps({"config_hash": "someone-else"}), encoding="utf-8")
        with pytest.raises(ArtifactError):
            run_experiment(validate_config(tiny_experiment), output_dir=out, workers=1)


@pytest.mark.integration
class TestCheckpoints:
    """Test checkpoint files and resuming interrupted runs."""

    def test_checkpoint_round_trip(self, temp_dir, tiny_experiment):
        config = validate_config(tiny_experiment)
        runner = ExperimentRunner(config, output_dir=temp_dir / "ckpt")
        with ParallelExecutionManager(1) as executor:
            engine = runner._engine(1, executor)
            engine.initialize()
            engine.step_generation()
            state = engine.state_dict()
            echo = runner.experiment_echo(1, run_seed(config.base_seed, 1))
            save_checkpoint(runner.checkpoint_dir(1), state, echo)
        loaded, loaded_echo = load_checkpoint(runner.checkpoint_dir(1) / CHECKPOINT_MANIFEST)
        assert loaded_echo == echo
        assert loaded["generation"] == 1
        assert loaded["rng_state"] == state["rng_state"]
        assert (loaded["population"] == state["population"]).all()
        assert loaded["events"] == state["events"]

    def test_missing_checkpoint(self, temp_dir):
        with pytest.raises(ArtifactError):
            load_checkpoint(temp_dir / "nothing")

    def test_resume_matches_uninterrupted(self, tiny_run, temp_dir):
        """Test resuming after generation 1 reproduces the uninterrupted run's artifacts."""
        config, reference, _ = tiny_run
        out = temp_dir / "interrupted"
        runner = ExperimentRunner(config, output_dir=out)
        seed = run_seed(config.base_seed, 1)
        with ParallelExecutionManager(1) as executor:
            engine: MfeaEngine = runner._engine(1, executor)
            engine.initialize()
            engine.step_generation()
            save_checkpoint(runner.checkpoint_dir(1), engine.state_dict(), runner.experiment_echo(1, seed))

        manifest_path = resume_experiment(runner.checkpoint_dir(1), workers=1)
        for pattern in RUN_FILES:
            name = pattern.format(r=1)
            assert (out / name).read_bytes() == (reference / name).read_bytes()
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        assert [r["run"] for r in manifest["runs"]] == [1]
        assert manifest["partial"] is True

    def test_resume_without_echo(self, temp_dir, tiny_experiment):
        config = validate_config(tiny_experiment)
        runner = ExperimentRunner(config, output_dir=temp_dir / "bare")
        with ParallelExecutionManager(1) as executor:
            engine = runner._engine(1, executor)
            engine.initialize()
            save_checkpoint(runner.checkpoint_dir(1), engine.state_dict())
        with pytest.raises(Exception) as excinfo:
            resume_experiment(runner.checkpoint_dir(1))
        assert "experiment description" in str(excinfo.value)
