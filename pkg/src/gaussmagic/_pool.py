"""Deterministic index-ordered parallel map used by the optimizers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")


def run_indexed(fn: Callable[[int], T], count: int, threads: int | None = None) -> list[T]:
    """Evaluate fn(0..count-1), results in index order.

    Results do not depend on the thread count: every task derives its own
    randomness from its index, and the reduction order is fixed.
    """
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(threads, count)) as pool:
        return list(pool.map(fn, range(count)))
