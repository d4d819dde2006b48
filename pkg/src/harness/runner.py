"""Experiment orchestration: independent MFEA runs, testing, checkpoints and artifacts.

Output directory layout::

    manifest.json
    curves_run{r}.csv  events_run{r}.csv  transfer_run{r}.csv
    transfer_summary_run{r}.csv  test_run{r}.csv
    summary.csv  summary_grid.csv  curves_long.csv  curves_aggregate.csv
    best_genomes/run{r}.bin (+ .json)
    checkpoints/run{r}/
"""

import json
import platform
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import pydantic
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from .. import __version__
from ..core.checkpoint import load_checkpoint, save_checkpoint
from ..core.evaluator import EvalReport, RLMultitaskEvaluator, TaskSpec, test_model
from ..core.mfea import MfeaEngine, MfeaResult
from ..core.parallel_execution import ParallelExecutionManager
from ..core.seeding import derive_seed
from ..core.unified_genome import PartitionMap, save_genomes
from ..utils.error_handler import ArtifactError, UsageError
from ..utils.logging_setup import get_logger
from .emitters import (
    curves_frame,
    emit_plot_data,
    read_csv,
    report_frame,
    summarize_tests,
    summary_grid,
    write_csv,
)
from .experiment_config import ExperimentConfig, config_hash, validate_config
from .transfer import compute_transfer_matrix, events_to_frame, transfer_summary

logger = get_logger(__name__)

# unified dimensionality reported for the reference 12-task setup
REFERENCE_UNIFIED_DIMENSION = 962
MANIFEST = "manifest.json"


def run_seed(base_seed: int, run: int) -> int:
    return derive_seed(base_seed, "run", run)


def held_out_seed(seed: int, task_index: int) -> int:
    return derive_seed(seed, "test", task_index)


@dataclass
class RunOutcome:
    run: int
    seed: int
    result: MfeaResult
    reports: List[EvalReport]


class ExperimentRunner:
    """Runs every configured run and writes the artifacts of each."""

    def __init__(
        self,
        config: ExperimentConfig,
        output_dir: Optional[Path] = None,
        workers: Optional[int] = None,
        config_path: Optional[Path] = None,
        console: Optional[Console] = None,
        show_progress: bool = False,
    ):
        self.config = config
        self.output_dir = Path(output_dir or config.output_dir)
        self.workers = config.parallel if workers is None else workers
        self.config_path = config_path
        self.console = console or Console(stderr=True)
        self.show_progress = show_progress
        self.tasks: List[TaskSpec] = config.task_specs()
        self.pmap: PartitionMap = config.partition_map()
        self.hash = config_hash(config)

    # paths

    def checkpoint_dir(self, run: int) -> Path:
        return self.output_dir / "checkpoints" / f"run{run}"

    def experiment_echo(self, run: int, seed: int) -> Dict[str, Any]:
        return {
            "config": self.config.canonical_dict(),
            "config_hash": self.hash,
            "run": run,
            "seed": seed,
            "output_dir": str(self.output_dir),
        }

    # running

    def _engine(self, run: int, executor: ParallelExecutionManager) -> MfeaEngine:
        seed = run_seed(self.config.base_seed, run)
        evaluator = RLMultitaskEvaluator(self.tasks, self.pmap, base_seed=seed, executor=executor)
        return MfeaEngine(evaluator, self.config.mfea_config(seed))

    def _checkpoint_callback(self, run: int, seed: int, progress=None, progress_task=None):
        every = self.config.checkpoint_every
        final = self.config.mfea.generations

        def callback(engine: MfeaEngine) -> None:
            if every and (engine.generation % every == 0 or engine.generation == final):
                echo = self.experiment_echo(run, seed)
                save_checkpoint(self.checkpoint_dir(run), engine.state_dict(), echo)
            if progress is not None:
                progress.update(progress_task, completed=engine.generation)

        return callback

    def _finish_run(self, run: int, seed: int, result: MfeaResult) -> RunOutcome:
        reports = [
            test_model(
                result.best_genomes[task.task_index],
                task,
                self.pmap,
                task.n_test_episodes,
                held_out_seed(seed, task.task_index),
            )
            for task in self.tasks
        ]
        outcome = RunOutcome(run, seed, result, reports)
        self.write_run_artifacts(outcome)
        logger.info(
            "run_finished",
            run=run,
            seed=seed,
            evaluations=result.evaluations,
            test_rewards=[round(r.mean_reward, 3) for r in reports],
        )
        return outcome

    def _drive(self, engine: MfeaEngine, run: int, seed: int) -> RunOutcome:
        with self._progress() as progress:
            progress_task = None
            if progress is not None:
                progress_task = progress.add_task(f"run {run}", total=self.config.mfea.generations)
                progress.update(progress_task, completed=engine.generation)
            result = engine.run(self._checkpoint_callback(run, seed, progress, progress_task))
        return self._finish_run(run, seed, result)

    def run_single(self, run: int, executor: ParallelExecutionManager) -> RunOutcome:
        seed = run_seed(self.config.base_seed, run)
        logger.info("run_started", run=run, seed=seed, tasks=[t.name for t in self.tasks])
        return self._drive(self._engine(run, executor), run, seed)

    def resume_run(self, run: int, state: Dict[str, Any], executor: ParallelExecutionManager) -> RunOutcome:
        seed = run_seed(self.config.base_seed, run)
        evaluator = RLMultitaskEvaluator(self.tasks, self.pmap, base_seed=seed, executor=executor)
        engine = MfeaEngine.from_state(evaluator, state)
        logger.info("run_resumed", run=run, seed=seed, generation=engine.generation)
        return self._drive(engine, run, seed)

    def run(self) -> Path:
        """All runs, then aggregates and the manifest; returns the manifest path."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        run_entries: Dict[int, Dict[str, Any]] = {}
        with ParallelExecutionManager(self.workers) as executor:
            for run in range(1, self.config.runs + 1):
                try:
                    outcome = self.run_single(run, executor)
                except BaseException as e:
                    run_entries[run] = self._failed_entry(run, e)
                    self.write_manifest(run_entries)
                    raise
                run_entries[run] = self.run_entry(outcome)
        self.write_aggregates()
        return self.write_manifest(run_entries)

    def _progress(self):
        if not self.show_progress:
            return _NullProgress()
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("gen {task.completed}/{task.total}"),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        )

    # artifacts

    def write_run_artifacts(self, outcome: RunOutcome) -> None:
        out, run, result = self.output_dir, outcome.run, outcome.result
        write_csv(curves_frame(result.history, self.tasks, run), out / f"curves_run{run}.csv")
        write_csv(events_to_frame(result.events), out / f"events_run{run}.csv")

        matrix = compute_transfer_matrix(result.events, len(self.tasks))
        names = [t.name for t in self.tasks]
        write_csv(matrix.to_frame(names), out / f"transfer_run{run}.csv")
        environments = [t.env_config.env_id.value for t in self.tasks]
        write_csv(transfer_summary(matrix, environments), out / f"transfer_summary_run{run}.csv")

        write_csv(report_frame(outcome.reports, self.tasks, run), out / f"test_run{run}.csv")
        save_genomes(
            out / "best_genomes" / f"run{run}",
            result.best_genomes,
            self.pmap,
            metadata={
                "run": run,
                "seed": outcome.seed,
                "tasks": [t.to_dict() for t in self.tasks],
                "best_costs": [float(c) for c in result.best_costs],
            },
        )

    def write_aggregates(self) -> None:
        """Summary and plot data over every ``test_run*.csv``/``curves_run*.csv`` present."""
        tests = _concat_runs(self.output_dir, "test_run")
        curves = _concat_runs(self.output_dir, "curves_run")
        summary = summarize_tests(tests)
        write_csv(summary, self.output_dir / "summary.csv")
        write_csv(summary_grid(summary), self.output_dir / "summary_grid.csv")
        emit_plot_data(curves, self.output_dir)

    def run_entry(self, outcome: RunOutcome) -> Dict[str, Any]:
        result = outcome.result
        p = self.config.mfea.population_size
        return {
            "run": outcome.run,
            "seed": outcome.seed,
            "status": "complete",
            "generations": result.generations,
            "initial_evaluations": p * len(self.tasks),
            "offspring_evaluations": result.generations * p,
            "evaluations": result.evaluations,
            "crossover_matings": result.crossover_matings,
            "crossover_events": len(result.events),
            "test_seeds": [held_out_seed(outcome.seed, t.task_index) for t in self.tasks],
        }

    def _failed_entry(self, run: int, error: BaseException) -> Dict[str, Any]:
        return {
            "run": run,
            "seed": run_seed(self.config.base_seed, run),
            "status": "failed",
            "error": f"{type(error).__name__}: {error}",
        }

    def write_manifest(self, run_entries: Dict[int, Dict[str, Any]]) -> Path:
        """Merge ``run_entries`` into the manifest already on disk, if any."""
        path = self.output_dir / MANIFEST
        existing: Dict[str, Any] = {}
        if path.exists():
            try:
                existing = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                logger.warning("manifest_unreadable", path=str(path))
        if existing.get("config_hash") not in (None, self.hash):
            raise ArtifactError(
                f"{path} belongs to a different configuration",
                suggestion="use a fresh --out directory",
            )
        runs = {int(r["run"]): r for r in existing.get("runs", [])}
        runs.update(run_entries)
        ordered = [runs[r] for r in sorted(runs)]
        manifest = {
            "name": self.config.name,
            "config": self.config.canonical_dict(),
            "config_hash": self.hash,
            "config_path": str(self.config_path) if self.config_path else None,
            "base_seed": self.config.base_seed,
            "seeds": {str(r["run"]): r["seed"] for r in ordered},
            "runs": ordered,
            "partial": any(r["status"] != "complete" for r in ordered)
            or len(ordered) < self.config.runs,
            "tasks": [t.to_dict() for t in self.tasks],
            "unified_dimension": self.pmap.total_dim,
            "reference_unified_dimension": REFERENCE_UNIFIED_DIMENSION,
            "partition_map": self.pmap.to_dict(),
            "versions": {
                "mfea_rl": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "pandas": pd.__version__,
                "pydantic": pydantic.VERSION,
            },
        }
        try:
            path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise ArtifactError(f"could not write {path}: {e}") from e
        logger.info("manifest_written", path=str(path), partial=manifest["partial"])
        return path


class _NullProgress:
    def __enter__(self):
        return None

    def __exit__(self, *exc_info):
        return False


def _concat_runs(out_dir: Path, prefix: str) -> pd.DataFrame:
    pattern = re.compile(rf"^{prefix}(\d+)\.csv$")
    files = sorted(
        (int(m.group(1)), path)
        for path in Path(out_dir).iterdir()
        if (m := pattern.match(path.name))
    )
    if not files:
        raise ArtifactError(f"no {prefix}*.csv files in {out_dir}")
    return pd.concat([read_csv(path) for _, path in files], ignore_index=True)


def run_experiment(
    config: ExperimentConfig,
    output_dir: Optional[Path] = None,
    workers: Optional[int] = None,
    config_path: Optional[Path] = None,
    show_progress: bool = False,
) -> Path:
    """Run an experiment end to end; returns the manifest path."""
    runner = ExperimentRunner(
        config,
        output_dir=output_dir,
        workers=workers,
        config_path=config_path,
        show_progress=show_progress,
    )
    logger.info(
        "experiment_started",
        name=config.name,
        runs=config.runs,
        tasks=len(runner.tasks),
        unified_dimension=runner.pmap.total_dim,
        workers=runner.workers,
        output_dir=str(runner.output_dir),
    )
    return runner.run()


def resume_experiment(
    checkpoint: Path,
    workers: Optional[int] = None,
    output_dir: Optional[Path] = None,
    show_progress: bool = False,
) -> Path:
    """Finish the run a checkpoint belongs to, then re-aggregate the output directory."""
    state, echo = load_checkpoint(Path(checkpoint))
    if "config" not in echo or "run" not in echo:
        raise UsageError(f"checkpoint {checkpoint} carries no experiment description")
    config = validate_config(echo["config"])
    runner = ExperimentRunner(
        config,
        output_dir=Path(output_dir or echo["output_dir"]),
        workers=workers,
        show_progress=show_progress,
    )
    run = int(echo["run"])
    with ParallelExecutionManager(runner.workers) as executor:
        outcome = runner.resume_run(run, state, executor)
    runner.write_aggregates()
    return runner.write_manifest({run: runner.run_entry(outcome)})
