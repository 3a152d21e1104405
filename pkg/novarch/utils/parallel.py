"""
Parallel - Order-preserving map over a thread pool capped by NOVARCH_THREADS.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from novarch.config import get_settings

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply func to every item, results in input order.

    Args:
        func: Pure function
        items: Inputs
        threads: Worker cap (defaults to settings.threads)

    Returns:
        List of results, same order as items
    """
    items = list(items)
    workers = min(threads or get_settings().threads, max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
