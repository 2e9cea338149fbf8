"""
Shared worker pool.

Results always come back in submission order, so any reduction done by the
caller is deterministic regardless of scheduling.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from services import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class TaskPool:
    """Thin wrapper over ThreadPoolExecutor with an order-preserving map"""

    def __init__(self, threads: Optional[int] = None):
        self.threads = max(1, threads or settings.GON_THREADS)

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if self.threads == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(fn, items))

    def resize(self, threads: int):
        self.threads = max(1, int(threads))
        logger.debug("task pool resized to %d threads", self.threads)


# Singleton instance
task_pool = TaskPool()
