"""Main CLI entry point for MFEA-RL - multitask neuroevolution experiments."""

import dataclasses
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .core.evaluator import TaskSpec, test_model
from .core.unified_genome import load_genomes
from .environments import get_environment
from .harness.emitters import compare_summaries, read_csv, write_csv
from .harness.experiment_config import load_config
from .harness.presets import canonical_name, list_presets, parse_preset, resolve_preset
from .harness.runner import resume_experiment, run_experiment
from .harness.transfer import compute_transfer_matrix, infer_task_count, read_events
from .utils.config import Settings
from .utils.error_handler import MfeaRlError, UsageError, exit_code_for, get_error_handler
from .utils.logging_setup import configure_logging, get_logger

console = Console()
err_console = Console(stderr=True)
logger = get_logger(__name__)

app = typer.Typer(
    name="mfea-rl",
    help="MFEA-RL - evolve classic-control policies for several tasks at once",
    add_completion=False,
    rich_markup_mode="rich",
    no_args_is_help=True,
)


def _settings(ctx: typer.Context) -> Settings:
    return ctx.obj if isinstance(ctx.obj, Settings) else Settings()


def _fail(error: MfeaRlError, command: str) -> None:
    """Render a handled error and exit with its category's code."""
    report = get_error_handler().handle_error(error, context={"command": command})
    body = f"[bold]{report.message}[/bold]"
    field_path = getattr(error, "field_path", None)
    if field_path:
        body += f"\n[dim]at[/dim] {field_path}"
    body += f"\n\n💡 {report.suggestion}"
    err_console.print(Panel(body, title=f"❌ {report.error_code}", border_style="red"))
    raise typer.Exit(exit_code_for(report))


@app.callback(invoke_without_command=True)
def main_callback(
    ctx: typer.Context,
    version: bool = typer.Option(False, "--version", "-v", help="Show version info"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR"),
    json_logs: bool = typer.Option(False, "--json-logs", help="Emit logs as JSON lines"),
    env_file: Optional[Path] = typer.Option(None, "--env-file", help="Read settings from this .env file"),
):
    """🧬 MFEA-RL - multifactorial neuroevolution of cartpole, acrobot and pendulum policies."""
    settings = Settings.from_env(env_file)
    if log_level:
        settings.log_level = log_level.upper()
    configure_logging(settings.log_level, json_output=json_logs)
    ctx.obj = settings

    if version:
        show_version()
        raise typer.Exit()


def show_version():
    """Show MFEA-RL version information."""
    table = Table(title="MFEA-RL Version Info")
    table.add_column("Field", style="bold blue")
    table.add_column("Value", style="green")

    table.add_row("Version", __version__)
    table.add_row("Description", "Multitask neuroevolution for classic control")
    table.add_row(
        "Python Version",
        f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}",
    )
    table.add_row("NumPy Version", np.__version__)

    console.print(table)


@app.command("run")
def run_command(
    ctx: typer.Context,
    config: Path = typer.Argument(..., help="Experiment config (JSON or YAML)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override base_seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory"),
    parallel: Optional[int] = typer.Option(
        None, "--parallel", min=0, help="Worker processes (0 = one per CPU)"
    ),
    runs: Optional[int] = typer.Option(None, "--runs", help="Override the number of runs"),
    generations: Optional[int] = typer.Option(None, "--generations", help="Override the generation count"),
    progress: bool = typer.Option(True, "--progress/--no-progress", help="Show a progress bar per run"),
):
    """🚀 Run an experiment: every run, its test reports and the aggregates."""
    settings = _settings(ctx)
    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["base_seed"] = seed
    if runs is not None:
        overrides["runs"] = runs
    if generations is not None:
        overrides["mfea"] = {"generations": generations, "max_evaluations": None}

    try:
        cfg = load_config(config, overrides)
        output_dir = out
        if output_dir is None and settings.output_root is not None:
            output_dir = settings.output_root / cfg.name
        workers = parallel if parallel is not None else settings.workers
        manifest = run_experiment(
            cfg,
            output_dir=output_dir,
            workers=workers,
            config_path=config,
            show_progress=progress,
        )
    except MfeaRlError as e:
        _fail(e, "run")

    console.print(f"✅ [green]{cfg.name}[/green]: {cfg.runs} run(s) finished")
    _print_summary(manifest.parent / "summary.csv")
    console.print(f"📁 Artifacts in [bold]{manifest.parent}[/bold]")


@app.command("resume")
def resume_command(
    ctx: typer.Context,
    checkpoint: Path = typer.Argument(..., help="Checkpoint directory (or its checkpoint.json)"),
    parallel: Optional[int] = typer.Option(
        None, "--parallel", min=0, help="Worker processes (0 = one per CPU)"
    ),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory (default: the original one)"),
    progress: bool = typer.Option(True, "--progress/--no-progress", help="Show a progress bar"),
):
    """⏯️ Continue a run from its last checkpoint and re-aggregate the output directory."""
    settings = _settings(ctx)
    workers = parallel if parallel is not None else settings.workers
    try:
        manifest = resume_experiment(checkpoint, workers=workers, output_dir=out, show_progress=progress)
    except MfeaRlError as e:
        _fail(e, "resume")

    console.print("✅ [green]Run resumed and finished[/green]")
    _print_summary(manifest.parent / "summary.csv")


def _select_task(tasks: List[TaskSpec], preset: str, task_index: Optional[int]) -> TaskSpec:
    """The stored task to test: explicit index, else same preset, else same environment."""
    if task_index is not None:
        if not 0 <= task_index < len(tasks):
            raise UsageError(f"task index {task_index} out of range for {len(tasks)} stored task(s)")
        return tasks[task_index]
    env_id, _ = parse_preset(preset)
    exact = [t for t in tasks if t.preset == preset]
    same_env = [t for t in tasks if t.env_config.env_id is env_id]
    if exact:
        return exact[0]
    if same_env:
        return same_env[0]
    raise UsageError(
        f"no stored policy was trained on {env_id.value}",
        suggestion="pass --task-index to pick a stored policy explicitly",
    )


@app.command("test")
def test_command(
    genome: Path = typer.Argument(..., help="Genome block written by a run (best_genomes/run{r}.bin)"),
    preset: str = typer.Argument(..., help="Environment preset to test on, e.g. cartpole:B"),
    episodes: int = typer.Option(250, "--episodes", "-n", min=1, help="Held-out episodes"),
    seed: int = typer.Option(0, "--seed", help="Seed of the held-out episode block"),
    task_index: Optional[int] = typer.Option(None, "--task-index", help="Stored task whose policy to use"),
    as_json: bool = typer.Option(False, "--json", help="Print the report as JSON"),
):
    """🧪 Test a stored policy on a preset over held-out episodes."""
    try:
        preset = canonical_name(preset)
        genomes, pmap, metadata = load_genomes(genome)
        stored = [TaskSpec.from_dict(t) for t in metadata.get("tasks", [])]
        if not stored:
            raise UsageError(f"{genome} carries no task description")
        trained = _select_task(stored, preset, task_index)
        env_config = resolve_preset(
            preset,
            max_steps=trained.env_config.max_steps,
            torque_bins=trained.env_config.torque_bins,
        )
        if env_config.env_id is not trained.env_config.env_id:
            raise UsageError(
                f"policy '{trained.name}' was trained on {trained.env_config.env_id.value}, "
                f"not {env_config.env_id.value}"
            )
        task = dataclasses.replace(trained, env_config=env_config, preset=preset, name=preset)
        vector = genomes[task.task_index] if genomes.ndim == 2 else genomes
        report = test_model(vector, task, pmap, episodes, seed)
    except MfeaRlError as e:
        _fail(e, "test")

    if as_json:
        typer.echo(
            json.dumps(
                {
                    "preset": preset,
                    "policy": trained.name,
                    "task_index": task.task_index,
                    "episodes": report.episodes_used,
                    "seed": seed,
                    "mean_reward": report.mean_reward,
                    "std_reward": report.std_reward,
                }
            )
        )
        return

    table = Table(title=f"Test of '{trained.name}' on {preset}")
    table.add_column("Episodes", justify="right")
    table.add_column("Mean reward", justify="right", style="green")
    table.add_column("Std", justify="right")
    table.add_row(str(report.episodes_used), f"{report.mean_reward:.3f}", f"{report.std_reward:.3f}")
    console.print(table)


@app.command("transfer-matrix")
def transfer_matrix_command(
    events: Path = typer.Argument(..., help="Crossover ledger (events_run{r}.csv)"),
    tasks: Optional[int] = typer.Option(
        None, "--tasks", "-k", min=1, help="Number of tasks (default: inferred)"
    ),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the matrix as CSV"),
):
    """🔀 Effective-crossover ratios per (donor, assignee) task pair."""
    try:
        ledger = read_events(events)
        n_tasks = tasks or infer_task_count(ledger)
        matrix = compute_transfer_matrix(ledger, n_tasks)
        if out is not None:
            write_csv(matrix.to_frame(), out)
    except MfeaRlError as e:
        _fail(e, "transfer-matrix")

    table = Table(title=f"Effective crossover ({len(ledger)} events)")
    table.add_column("donor \\ assignee", style="bold blue")
    for k in range(n_tasks):
        table.add_column(str(k), justify="right")
    for i, row in enumerate(matrix.ratios()):
        table.add_row(str(i), *("-" if r is None else f"{r:.3f}" for r in row))
    console.print(table)
    if out is not None:
        console.print(f"📁 Written to [bold]{out}[/bold]")


@app.command("compare")
def compare_command(
    joint: Path = typer.Argument(..., help="summary.csv of the joint (multitask) experiment"),
    separate: List[Path] = typer.Option(
        ..., "--separate", "-s", help="summary.csv of a single-task experiment (repeatable)"
    ),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the comparison as CSV"),
):
    """⚖️ Per-task degradation of a joint experiment against separate ones."""
    try:
        separate_frame = pd.concat([read_csv(path) for path in separate], ignore_index=True)
        comparison = compare_summaries(separate_frame, read_csv(joint))
        if out is not None:
            write_csv(comparison, out)
    except MfeaRlError as e:
        _fail(e, "compare")

    table = Table(title="Separate vs joint test reward")
    for column in ("Task", "Separate", "Joint", "Degradation", "Relative"):
        table.add_column(column, justify="left" if column == "Task" else "right")
    for row in comparison.itertuples(index=False):
        relative = "-" if pd.isna(row.relative_degradation) else f"{row.relative_degradation:.2%}"
        table.add_row(
            row.task,
            f"{row.mean_reward_separate:.3f}",
            f"{row.mean_reward_joint:.3f}",
            f"{row.degradation:.3f}",
            relative,
        )
    console.print(table)


@app.command("presets")
def presets_command():
    """📋 List the environment configuration presets."""
    table = Table(title="Environment presets")
    table.add_column("Preset", style="bold blue")
    table.add_column("Parameters", style="green")
    table.add_column("Episode cap", justify="right")
    table.add_column("Actions", justify="right")
    knobs = {
        "cartpole": ("pole_length",),
        "acrobot": ("joint_length",),
        "pendulum": ("max_speed", "max_torque"),
    }
    for name, env_config in list_presets():
        params = ", ".join(f"{k}={getattr(env_config, k):g}" for k in knobs[env_config.env_id.value])
        actions = get_environment(env_config.env_id).n_actions(env_config)
        table.add_row(name, params, str(env_config.episode_cap), str(actions))
    console.print(table)


def _print_summary(path: Path) -> None:
    if not path.exists():
        return
    summary = pd.read_csv(path)
    table = Table(title="Test reward across runs")
    table.add_column("Task", style="bold blue")
    table.add_column("Runs", justify="right")
    table.add_column("Mean", justify="right", style="green")
    table.add_column("Std", justify="right")
    for row in summary.itertuples(index=False):
        table.add_row(str(row.task), str(row.runs), f"{row.mean_reward:.3f}", f"{row.std_reward:.3f}")
    console.print(table)


if __name__ == "__main__":
    app()
