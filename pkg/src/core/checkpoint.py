"""Checkpoint/resume for MFEA runs.

A checkpoint directory holds ``checkpoint.json`` (generation counters,
config, PCG64 state, history, crossover ledger and a free-form echo of the
experiment) plus little-endian float64 blocks for the array state. The
JSON file is written last, so a directory with a readable manifest always
has complete array blocks.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..utils.error_handler import ArtifactError
from ..utils.logging_setup import get_logger

logger = get_logger(__name__)

MANIFEST = "checkpoint.json"
FORMAT_VERSION = 1
_ARRAY_BLOCKS = {
    "population": "population.bin",
    "costs": "costs.bin",
    "best_genomes": "best.bin",
    "best_costs": "best_costs.bin",
}


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def save_checkpoint(
    directory: Path, state: Dict[str, Any], experiment: Optional[Dict[str, Any]] = None
) -> Path:
    """Persist an ``MfeaEngine.state_dict()``; returns the manifest path."""
    directory = Path(directory)
    manifest: Dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "experiment": experiment or {},
        "arrays": {},
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for key, value in state.items():
            if key in _ARRAY_BLOCKS:
                array = np.asarray(value, dtype="<f8")
                _atomic_write(directory / _ARRAY_BLOCKS[key], array.tobytes(order="C"))
                manifest["arrays"][key] = {"file": _ARRAY_BLOCKS[key], "shape": list(array.shape)}
            else:
                manifest[key] = value
        _atomic_write(
            directory / MANIFEST,
            (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        )
    except OSError as e:
        raise ArtifactError(
            f"could not write checkpoint to {directory}: {e}",
            suggestion="check that the output directory is writable",
        ) from e
    logger.debug("checkpoint_written", directory=str(directory), generation=state.get("generation"))
    return directory / MANIFEST


def load_checkpoint(directory: Path) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """Return ``(state, experiment)`` as saved by :func:`save_checkpoint`."""
    directory = Path(directory)
    if directory.is_file():
        directory = directory.parent
    try:
        manifest = json.loads((directory / MANIFEST).read_text(encoding="utf-8"))
        state = {k: v for k, v in manifest.items() if k not in ("arrays", "experiment", "format_version")}
        for key, block in manifest["arrays"].items():
            raw = (directory / block["file"]).read_bytes()
            state[key] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(block["shape"])
    except FileNotFoundError as e:
        raise ArtifactError(
            f"no checkpoint found in {directory}",
            suggestion="point resume at a run's checkpoint directory (e.g. <out>/checkpoints/run1)",
        ) from e
    except (OSError, KeyError, ValueError) as e:
        raise ArtifactError(f"checkpoint in {directory} is unreadable: {e}") from e
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ArtifactError(
            f"unsupported checkpoint format {manifest.get('format_version')!r} in {directory}"
        )
    return state, manifest.get("experiment", {})
