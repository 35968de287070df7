"""
Replicate fan-out. Replicate i always draws from rng.stream(seed, i), and
results are merged by index, so output does not depend on the worker count.
"""

import concurrent.futures as cf
import logging
from typing import Any, Callable, Sequence

from app.rng import stream

logger = logging.getLogger(__name__)


def _run_batch(task: Callable, seed: int, batch: Sequence[int]) -> list[Any]:
    return [task(stream(seed, i)) for i in batch]


def _batches(n: int, workers: int) -> list[range]:
    sizes = [n // workers] * workers
    for i in range(n % workers):
        sizes[i] += 1
    out, start = [], 0
    for size in sizes:
        if size:
            out.append(range(start, start + size))
        start += size
    return out


def run_replicates(task: Callable, n: int, seed: int, workers: int = 1) -> list[Any]:
    """
    task(rng) for rng = stream(seed, i), i = 0..n-1. With workers > 1 the task
    and its bound arguments must be picklable.
    """
    if workers <= 1 or n < 2:
        return _run_batch(task, seed, range(n))

    batches = _batches(n, workers)
    logger.info("dispatching %d replicates in %d batches", n, len(batches))
    results: list[Any] = [None] * n
    with cf.ProcessPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(_run_batch, task, seed, batch): batch for batch in batches}
        for future in cf.as_completed(futures):
            batch = futures[future]
            for i, value in zip(batch, future.result()):
                results[i] = value
    return results
