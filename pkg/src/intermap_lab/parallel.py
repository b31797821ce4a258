"""Seeded batch streams and a small worker pool.

Work is always cut into a fixed number of batches, each with its own
``SeedSequence`` child, so results depend on (seed, batches) and never on how
many workers process them. The numba kernels release the GIL, so a thread
pool gives real parallelism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def batch_rngs(seed: int, n_batches: int) -> list:
    children = np.random.SeedSequence(int(seed)).spawn(int(n_batches))
    return [np.random.default_rng(c) for c in children]


def split_counts(total: int, n_batches: int) -> np.ndarray:
    """Near-equal positive batch sizes summing to ``total``."""
    if n_batches < 1 or total < n_batches:
        raise ValueError("need at least one sample per batch")
    base, extra = divmod(int(total), int(n_batches))
    return np.array([base + (i < extra) for i in range(n_batches)], dtype=np.int64)


def run_batches(fn, n_batches: int, workers: int = 1) -> list:
    """``[fn(i) for i in range(n_batches)]``, optionally on a thread pool."""
    if workers <= 1 or n_batches <= 1:
        return [fn(i) for i in range(n_batches)]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(fn, range(n_batches)))


def uniform_starts(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform points of (-1, 1); the measure-zero value 0 is redrawn."""
    x = rng.uniform(-1.0, 1.0, size=size)
    bad = (x == 0.0) | (x == -1.0)
    while bad.any():
        x[bad] = rng.uniform(-1.0, 1.0, size=int(bad.sum()))
        bad = (x == 0.0) | (x == -1.0)
    return x


def blocks(n: int, block: int):
    """(start, stop) pairs covering range(n) in chunks of ``block``."""
    for lo in range(0, n, block):
        yield lo, min(n, lo + block)
