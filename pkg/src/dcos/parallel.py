"""Deterministic chunked execution of sampling jobs.

Work is cut into fixed-size chunks; chunk ``c`` draws from the Philox stream
``(seed, c)``.  Results are merged in chunk order, so output depends only on
(seed, samples), never on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

CHUNK = 1000


def default_threads() -> int:
    env = os.environ.get("DCOS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunk_sizes(samples: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(samples, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(fn: Callable, samples: int, seed: int, args: tuple = (), threads: int | None = None,
               chunk: int = CHUNK) -> list:
    """Call ``fn(chunk_index, size, seed, *args)`` for every chunk, in order."""
    sizes = chunk_sizes(samples, chunk)
    jobs = [(c, s, seed) + tuple(args) for c, s in enumerate(sizes)]
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(jobs) <= 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, *zip(*jobs)))
