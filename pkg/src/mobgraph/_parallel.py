from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "MOBGRAPH_THREADS"


def thread_count() -> int:
    """Worker count from ``MOBGRAPH_THREADS`` (unset or 0 means auto)."""
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        requested = 0
    if requested > 0:
        return requested
    return max(1, min(8, os.cpu_count() or 1))


def chunks(n: int, size: int) -> list[range]:
    return [range(start, min(start + size, n)) for start in range(0, n, size)]


def pmap(func: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """Order-preserving map, threaded when more than one worker is allowed."""
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
