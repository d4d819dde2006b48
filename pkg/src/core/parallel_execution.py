"""Process-pool execution of independent evaluation batches."""

import concurrent.futures
import os
import time
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from ..utils.error_handler import ConfigurationError
from ..utils.logging_setup import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(requested: Optional[int]) -> int:
    """Worker count for a request; 0 or None means one per CPU."""
    if requested is None or requested == 0:
        return os.cpu_count() or 1
    if requested < 0:
        raise ConfigurationError(f"must be >= 0, got {requested}", field_path="parallel")
    return int(requested)


class ParallelExecutionManager:
    """Ordered map over a process pool; ``max_workers=1`` runs in-process.

    Results always come back in submission order, so callers that derive
    every random seed from the item itself get identical output for any
    worker count.
    """

    def __init__(self, max_workers: Optional[int] = 1):
        self.max_workers = resolve_workers(max_workers)
        self._executor: Optional[concurrent.futures.ProcessPoolExecutor] = None
        self.execution_stats: Dict[str, Any] = {
            "batches": 0,
            "items": 0,
            "total_time": 0.0,
        }

    @property
    def executor(self) -> concurrent.futures.ProcessPoolExecutor:
        if self._executor is None:
            self._executor = concurrent.futures.ProcessPoolExecutor(max_workers=self.max_workers)
            logger.debug("process_pool_started", workers=self.max_workers)
        return self._executor

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """``[fn(item) for item in items]``, possibly computed in worker processes."""
        items = list(items)
        start = time.perf_counter()
        if self.max_workers == 1 or len(items) <= 1:
            results = [fn(item) for item in items]
        else:
            chunksize = max(1, len(items) // (4 * self.max_workers))
            results = list(self.executor.map(fn, items, chunksize=chunksize))
        self._update_execution_stats(len(items), time.perf_counter() - start)
        return results

    def _update_execution_stats(self, n_items: int, elapsed: float) -> None:
        self.execution_stats["batches"] += 1
        self.execution_stats["items"] += n_items
        self.execution_stats["total_time"] += elapsed

    def get_execution_summary(self) -> Dict[str, Any]:
        batches = self.execution_stats["batches"]
        return {
            "workers": self.max_workers,
            **self.execution_stats,
            "average_batch_time": self.execution_stats["total_time"] / batches if batches else 0.0,
        }

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "ParallelExecutionManager":
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()
