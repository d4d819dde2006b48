"""CSV artifacts: reward curves, test reports, summaries and comparisons.

All files are UTF-8, RFC-4180 (CRLF line endings), full float precision.
"""

from pathlib import Path
from typing import List, Sequence

import numpy as np
import pandas as pd

from ..core.evaluator import EvalReport, TaskSpec
from ..core.mfea import GenerationStats
from ..utils.error_handler import ArtifactError, UsageError
from ..utils.logging_setup import get_logger
from .presets import parse_preset

logger = get_logger(__name__)

CURVE_COLUMNS = ["generation", "task", "run", "evaluations", "best_reward", "mean_reward", "std_reward"]
LONG_COLUMNS = ["generation", "task", "run", "best_reward", "mean_reward", "std_reward"]
TEST_COLUMNS = ["task", "environment", "preset", "run", "mean_reward", "std_reward", "episodes"]
SUMMARY_COLUMNS = ["task", "environment", "preset", "runs", "mean_reward", "std_reward", "mean_episode_std"]


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\r\n")
    except OSError as e:
        raise ArtifactError(f"could not write {path}: {e}") from e
    logger.debug("artifact_written", path=str(path), rows=len(frame))
    return path


def read_csv(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except FileNotFoundError as e:
        raise ArtifactError(f"file not found: {path}") from e
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ArtifactError(f"could not read {path}: {e}") from e


def _preset_letter(task: TaskSpec) -> str:
    return parse_preset(task.preset)[1] if task.preset else ""


def curves_frame(history: Sequence[GenerationStats], tasks: Sequence[TaskSpec], run: int) -> pd.DataFrame:
    """One row per (generation, task) of a run."""
    rows = [
        {
            "generation": stats.generation,
            "task": task.name,
            "run": run,
            "evaluations": stats.evaluations,
            "best_reward": stats.best_reward[task.task_index],
            "mean_reward": stats.mean_reward[task.task_index],
            "std_reward": stats.std_reward[task.task_index],
        }
        for stats in history
        for task in tasks
    ]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def report_frame(reports: Sequence[EvalReport], tasks: Sequence[TaskSpec], run: int) -> pd.DataFrame:
    rows = [
        {
            "task": task.name,
            "environment": task.env_config.env_id.value,
            "preset": _preset_letter(task),
            "run": run,
            "mean_reward": report.mean_reward,
            "std_reward": report.std_reward,
            "episodes": report.episodes_used,
        }
        for task, report in zip(tasks, reports)
    ]
    return pd.DataFrame(rows, columns=TEST_COLUMNS)


def emit_plot_data(curves: pd.DataFrame, out_dir: Path) -> List[Path]:
    """``curves_long.csv`` (one row per generation, task and run) and ``curves_aggregate.csv``.

    The aggregate holds the across-run mean and population std (ddof=0) per
    generation and task, so a single run has zero spread.
    """
    if curves.empty:
        raise UsageError("no curve data to emit")
    long = curves.sort_values(["run", "generation"], kind="stable")[LONG_COLUMNS].reset_index(drop=True)

    grouped = long.groupby(["generation", "task"], sort=False)
    aggregate = grouped.agg(
        runs=("run", "nunique"),
        best_reward_mean=("best_reward", "mean"),
        best_reward_std=("best_reward", lambda s: float(np.std(s.to_numpy()))),
        mean_reward_mean=("mean_reward", "mean"),
        mean_reward_std=("mean_reward", lambda s: float(np.std(s.to_numpy()))),
    ).reset_index()
    aggregate = aggregate.sort_values("generation", kind="stable").reset_index(drop=True)

    out_dir = Path(out_dir)
    return [
        write_csv(long, out_dir / "curves_long.csv"),
        write_csv(aggregate, out_dir / "curves_aggregate.csv"),
    ]


def summarize_tests(tests: pd.DataFrame) -> pd.DataFrame:
    """Per task: mean of per-run test means, their std across runs (ddof=0), mean within-run std."""
    if tests.empty:
        raise UsageError("no test reports to summarize")
    grouped = tests.groupby(["task", "environment", "preset"], sort=False, dropna=False)
    summary = grouped.agg(
        runs=("run", "nunique"),
        mean_reward=("mean_reward", "mean"),
        std_reward=("mean_reward", lambda s: float(np.std(s.to_numpy()))),
        mean_episode_std=("std_reward", "mean"),
    ).reset_index()
    summary["preset"] = summary["preset"].fillna("")
    return summary[SUMMARY_COLUMNS]


def summary_grid(summary: pd.DataFrame) -> pd.DataFrame:
    """Environment rows by configuration columns (``A_mean``, ``A_std``, ...)."""
    labelled = summary[summary["preset"].fillna("") != ""]
    if labelled.empty:
        return pd.DataFrame(columns=["environment"])
    environments = list(dict.fromkeys(labelled["environment"]))
    letters = sorted(set(labelled["preset"]))
    rows = []
    for env in environments:
        row = {"environment": env}
        for letter in letters:
            match = labelled[(labelled["environment"] == env) & (labelled["preset"] == letter)]
            row[f"{letter}_mean"] = float(match["mean_reward"].iloc[0]) if len(match) else np.nan
            row[f"{letter}_std"] = float(match["std_reward"].iloc[0]) if len(match) else np.nan
        rows.append(row)
    columns = ["environment"] + [f"{l}_{s}" for l in letters for s in ("mean", "std")]
    return pd.DataFrame(rows, columns=columns)


def compare_summaries(separate: pd.DataFrame, joint: pd.DataFrame) -> pd.DataFrame:
    """Per-task degradation of a joint run against separate single-task runs.

    Tasks are matched by name; ``degradation`` is separate mean minus joint mean
    (positive means the joint run did worse) and ``relative_degradation``
    divides it by ``|separate mean|``.
    """
    merged = joint[["task", "environment", "mean_reward"]].merge(
        separate[["task", "mean_reward"]],
        on="task",
        how="inner",
        suffixes=("_joint", "_separate"),
    )
    if merged.empty:
        raise UsageError("the two summaries have no task in common")
    merged["degradation"] = merged["mean_reward_separate"] - merged["mean_reward_joint"]
    scale = merged["mean_reward_separate"].abs().replace(0.0, np.nan)
    merged["relative_degradation"] = merged["degradation"] / scale
    return merged[
        [
            "task",
            "environment",
            "mean_reward_separate",
            "mean_reward_joint",
            "degradation",
            "relative_degradation",
        ]
    ]
