"""Worker-count resolution and deterministic chunked execution.

The environment variable KMAX_THREADS caps worker parallelism (0 or
unset means auto).  Work is split into contiguous index chunks and every
chunk's result is collected in chunk order, so the combined output never
depends on scheduling or on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

T = TypeVar("T")


def worker_count() -> int:
    raw = os.environ.get("KMAX_THREADS", "0")
    try:
        w = int(raw)
    except ValueError:
        w = 0
    if w <= 0:
        w = os.cpu_count() or 1
    return w


def chunk_ranges(n_items: int, workers: int) -> List[Tuple[int, int]]:
    workers = max(1, min(workers, n_items)) if n_items > 0 else 1
    bounds = [round(i * n_items / workers) for i in range(workers + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(workers) if bounds[i] < bounds[i + 1]]


def run_chunked(n_items: int, fn_chunk: Callable[[int, int], T]) -> Sequence[T]:
    """Apply fn_chunk(start, stop) over a partition of range(n_items).

    Results are returned in chunk order.  fn_chunk must depend only on
    the index range it receives, never on which worker runs it.
    """
    ranges = chunk_ranges(n_items, worker_count())
    if len(ranges) <= 1:
        return [fn_chunk(s, e) for s, e in ranges]
    with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
        return list(pool.map(lambda r: fn_chunk(*r), ranges))
