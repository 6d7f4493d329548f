#!/usr/bin/env python
"""
parallel.py – deterministic data-parallel sweeps.

Work over a flattened index range is cut into fixed-size chunks whose
boundaries depend only on the range length and chunk size, never on the
worker count. Each chunk writes a disjoint slice of its output, so any
thread count gives bitwise identical results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

DEFAULT_CHUNK = 16384


def chunk_bounds(total: int, chunk: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    """Return [(lo, hi), ...] covering range(total) in order."""
    if chunk < 1:
        raise ValueError(f"chunk size must be positive, got {chunk}")
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def chunk_map(fn: Callable[[int, int], None], total: int, threads: int = 1,
              chunk: int = DEFAULT_CHUNK) -> None:
    """Call ``fn(lo, hi)`` for every chunk of range(total).

    Args:
        fn: Worker writing its results for [lo, hi) into caller-owned arrays
        total: Length of the flattened index range
        threads: Worker threads; 1 runs serially in the calling thread
        chunk: Chunk length

    Exceptions raised by a worker propagate to the caller.
    """
    bounds = chunk_bounds(total, chunk)
    if threads <= 1 or len(bounds) <= 1:
        for lo, hi in bounds:
            fn(lo, hi)
        return

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in bounds]
        for fut in futures:
            fut.result()
