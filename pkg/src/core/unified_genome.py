"""Unified search space: one shared partition plus one specific partition per task.

Layout of a genome of length ``total_dim``:

    [shared slot layer 1 | ... | shared slot layer L_sh |
     task 1 layers L_sh+1.. | task 2 layers L_sh+1.. | ...]

A shared slot is as wide as the widest task's layer; a task reads the
prefix of the slot that matches its own layer size. Genome values live in
[0, 1] and decode affinely to weights in [-w_max, +w_max].
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.error_handler import ArtifactError, ConfigurationError, UsageError
from .policy_net import Architecture
from .seeding import SeedLike, make_rng

DEFAULT_W_MAX = 4.0

Span = Tuple[int, int]  # (offset, length)


@dataclass(frozen=True)
class PartitionMap:
    """Where every task's layers live inside the unified genome."""

    layer_param_counts: Tuple[Tuple[int, ...], ...]
    shared_layers: int
    shared_slots: Tuple[Span, ...]
    specific_spans: Tuple[Tuple[Span, ...], ...]
    total_dim: int
    w_max: float = DEFAULT_W_MAX
    _gather: Tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gather = []
        for k, counts in enumerate(self.layer_param_counts):
            parts = [
                np.arange(offset, offset + counts[layer])
                for layer, (offset, _) in enumerate(self.shared_slots)
            ]
            parts += [np.arange(offset, offset + length) for offset, length in self.specific_spans[k]]
            index = np.concatenate(parts).astype(np.int64)
            index.setflags(write=False)
            gather.append(index)
        object.__setattr__(self, "_gather", tuple(gather))

    @property
    def n_tasks(self) -> int:
        return len(self.layer_param_counts)

    def task_dimension(self, task_index: int) -> int:
        """D_k: number of weights task k decodes to."""
        return sum(self.layer_param_counts[self._check_task(task_index)])

    def gather_indices(self, task_index: int) -> np.ndarray:
        """Genome positions read by task k, in weight-vector order."""
        return self._gather[self._check_task(task_index)]

    def _check_task(self, task_index: int) -> int:
        if not 0 <= task_index < self.n_tasks:
            raise UsageError(f"task index {task_index} out of range (K={self.n_tasks})")
        return task_index

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer_param_counts": [list(c) for c in self.layer_param_counts],
            "shared_layers": self.shared_layers,
            "shared_slots": [list(s) for s in self.shared_slots],
            "specific_spans": [[list(s) for s in spans] for spans in self.specific_spans],
            "total_dim": self.total_dim,
            "w_max": self.w_max,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PartitionMap":
        return cls(
            layer_param_counts=tuple(tuple(c) for c in data["layer_param_counts"]),
            shared_layers=int(data["shared_layers"]),
            shared_slots=tuple(tuple(s) for s in data["shared_slots"]),
            specific_spans=tuple(tuple(tuple(s) for s in spans) for spans in data["specific_spans"]),
            total_dim=int(data["total_dim"]),
            w_max=float(data.get("w_max", DEFAULT_W_MAX)),
        )


def build_partition_map(
    architectures: Sequence[Architecture],
    shared_layers: int,
    w_max: float = DEFAULT_W_MAX,
) -> PartitionMap:
    """Lay out shared slots in layer order, then specific spans by task then layer."""
    if not architectures:
        raise ConfigurationError("at least one architecture is required", field_path="tasks")
    min_layers = min(a.n_weight_layers for a in architectures)
    if not 1 <= shared_layers < min_layers:
        raise ConfigurationError(
            f"must satisfy 1 <= L_sh < {min_layers}, got {shared_layers}",
            field_path="architecture.shared_layers",
        )
    if not w_max > 0:
        raise ConfigurationError(f"must be positive, got {w_max}", field_path="architecture.w_max")

    counts = tuple(tuple(a.layer_param_counts) for a in architectures)

    offset = 0
    shared_slots: List[Span] = []
    for layer in range(shared_layers):
        width = max(c[layer] for c in counts)
        shared_slots.append((offset, width))
        offset += width

    specific: List[Tuple[Span, ...]] = []
    for task_counts in counts:
        spans = []
        for layer in range(shared_layers, len(task_counts)):
            spans.append((offset, task_counts[layer]))
            offset += task_counts[layer]
        specific.append(tuple(spans))

    return PartitionMap(
        layer_param_counts=counts,
        shared_layers=shared_layers,
        shared_slots=tuple(shared_slots),
        specific_spans=tuple(specific),
        total_dim=offset,
        w_max=float(w_max),
    )


def _check_genome(genome: np.ndarray, pmap: PartitionMap) -> np.ndarray:
    genome = np.asarray(genome, dtype=np.float64)
    if genome.shape != (pmap.total_dim,):
        raise UsageError(f"genome has shape {genome.shape}, unified space has {pmap.total_dim} dims")
    return genome


def decode(genome: np.ndarray, task_index: int, pmap: PartitionMap) -> np.ndarray:
    """Weight vector of task k: shared slot prefixes then its own span, mapped to [-w_max, w_max]."""
    genome = _check_genome(genome, pmap)
    values = genome[pmap.gather_indices(task_index)]
    return pmap.w_max * (2.0 * values - 1.0)


def encode(
    weights: np.ndarray,
    task_index: int,
    pmap: PartitionMap,
    base: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Write task k's weights into a copy of ``base`` (all 0.5 when omitted)."""
    index = pmap.gather_indices(task_index)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != index.shape:
        raise UsageError(f"task {task_index} has {index.size} weights, got {weights.size}")
    if np.any(np.abs(weights) > pmap.w_max):
        raise UsageError(f"weights must lie in [-{pmap.w_max}, {pmap.w_max}]")
    genome = np.full(pmap.total_dim, 0.5) if base is None else _check_genome(base, pmap).copy()
    genome[index] = (weights / pmap.w_max + 1.0) / 2.0
    return genome


def random_genome(pmap: PartitionMap, seed: SeedLike) -> np.ndarray:
    """I.i.d. uniform values in [0, 1]."""
    return make_rng(seed).random(pmap.total_dim)


def save_genomes(
    path: Path,
    genomes: np.ndarray,
    pmap: PartitionMap,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write ``<path>.bin`` (little-endian float64) and its ``<path>.json`` sidecar."""
    path = Path(path)
    genomes = np.asarray(genomes, dtype="<f8")
    if genomes.shape[-1] != pmap.total_dim:
        raise UsageError(f"genomes have {genomes.shape[-1]} dims, map has {pmap.total_dim}")
    bin_path = path.with_suffix(".bin")
    sidecar = {
        "format": "float64-le",
        "shape": list(genomes.shape),
        "partition_map": pmap.to_dict(),
        "metadata": metadata or {},
    }
    try:
        bin_path.parent.mkdir(parents=True, exist_ok=True)
        bin_path.write_bytes(genomes.tobytes(order="C"))
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise ArtifactError(f"could not write genome block {bin_path}: {e}") from e
    return bin_path


def load_genomes(path: Path) -> Tuple[np.ndarray, PartitionMap, Dict[str, Any]]:
    """Read a genome block written by :func:`save_genomes`."""
    path = Path(path)
    try:
        sidecar = json.loads(path.with_suffix(".json").read_text())
        raw = path.with_suffix(".bin").read_bytes()
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactError(f"could not read genome block {path}: {e}") from e
    genomes = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(sidecar["shape"])
    return genomes, PartitionMap.from_dict(sidecar["partition_map"]), sidecar.get("metadata", {})
