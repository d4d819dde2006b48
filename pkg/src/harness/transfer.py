"""Effective-crossover matrix: how often mating across skills improved the receiving task."""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..core.mfea import CrossoverEvent
from ..utils.error_handler import ArtifactError, UsageError

EVENT_COLUMNS = [
    "generation",
    "mating_index",
    "offspring_index",
    "parent_skill_a",
    "parent_skill_b",
    "assigned_task",
    "donor_task",
    "improved",
    "offspring_cost",
]


@dataclass
class TransferMatrix:
    """Donor tasks on rows, assignee tasks on columns."""

    totals: np.ndarray
    effective: np.ndarray

    @property
    def n_tasks(self) -> int:
        return self.totals.shape[0]

    def ratio(self, donor: int, assignee: int) -> Optional[float]:
        total = int(self.totals[donor, assignee])
        if total == 0:
            return None
        return float(self.effective[donor, assignee]) / total

    def ratios(self) -> List[List[Optional[float]]]:
        return [[self.ratio(i, j) for j in range(self.n_tasks)] for i in range(self.n_tasks)]

    def to_frame(self, task_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Square frame; undefined cells are NaN (empty in CSV)."""
        names = list(task_names) if task_names is not None else [str(k) for k in range(self.n_tasks)]
        frame = pd.DataFrame(
            [[np.nan if r is None else r for r in row] for row in self.ratios()],
            columns=names,
            dtype=np.float64,
        )
        frame.insert(0, "donor", names)
        return frame


def compute_transfer_matrix(events: Iterable[CrossoverEvent], n_tasks: int) -> TransferMatrix:
    """Tally evaluated crossover events per (donor, assignee) pair."""
    if n_tasks < 1:
        raise UsageError(f"n_tasks must be >= 1, got {n_tasks}")
    totals = np.zeros((n_tasks, n_tasks), dtype=np.int64)
    effective = np.zeros((n_tasks, n_tasks), dtype=np.int64)
    for event in events:
        if event.improved is None:
            continue
        totals[event.donor_task, event.assigned_task] += 1
        effective[event.donor_task, event.assigned_task] += int(event.improved)
    return TransferMatrix(totals, effective)


def transfer_summary(matrix: TransferMatrix, environments: Sequence[str]) -> pd.DataFrame:
    """Effective-crossover ratio pooled over intra-task, intra-environment and inter-environment pairs."""
    if len(environments) != matrix.n_tasks:
        raise UsageError(f"{len(environments)} environment labels for {matrix.n_tasks} tasks")
    scopes = {"intra_task": [0, 0], "intra_environment": [0, 0], "inter_environment": [0, 0]}
    for i in range(matrix.n_tasks):
        for j in range(matrix.n_tasks):
            if i == j:
                scope = "intra_task"
            elif environments[i] == environments[j]:
                scope = "intra_environment"
            else:
                scope = "inter_environment"
            scopes[scope][0] += int(matrix.totals[i, j])
            scopes[scope][1] += int(matrix.effective[i, j])
    rows = [
        {
            "scope": scope,
            "events": total,
            "effective": effective,
            "ratio": effective / total if total else np.nan,
        }
        for scope, (total, effective) in scopes.items()
    ]
    return pd.DataFrame(rows, columns=["scope", "events", "effective", "ratio"])


def events_to_frame(events: Iterable[CrossoverEvent]) -> pd.DataFrame:
    return pd.DataFrame([e.to_dict() for e in events], columns=EVENT_COLUMNS)


def read_events(path: Path) -> List[CrossoverEvent]:
    """Crossover ledger written as ``events_run{r}.csv``."""
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as e:
        raise ArtifactError(f"event log not found: {path}") from e
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ArtifactError(f"could not read event log {path}: {e}") from e
    missing = [c for c in EVENT_COLUMNS if c not in frame.columns]
    if missing:
        raise ArtifactError(f"{path.name} is missing columns: {', '.join(missing)}")
    events = []
    for row in frame.itertuples(index=False):
        events.append(
            CrossoverEvent(
                generation=int(row.generation),
                mating_index=int(row.mating_index),
                offspring_index=int(row.offspring_index),
                parent_skill_a=int(row.parent_skill_a),
                parent_skill_b=int(row.parent_skill_b),
                assigned_task=int(row.assigned_task),
                donor_task=int(row.donor_task),
                improved=None if pd.isna(row.improved) else bool(row.improved),
                offspring_cost=None if pd.isna(row.offspring_cost) else float(row.offspring_cost),
            )
        )
    return events


def infer_task_count(events: Sequence[CrossoverEvent]) -> int:
    """Largest task index seen in a ledger, plus one (at least 1)."""
    seen = [max(e.parent_skill_a, e.parent_skill_b, e.assigned_task, e.donor_task) for e in events]
    return max(seen, default=0) + 1
