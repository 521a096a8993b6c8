"""Order-preserving trial fan-out.

Trials are split into contiguous chunks; each chunk is a pure function of
``(cfg, start, stop)`` and results are concatenated in chunk order, so the
output does not depend on the number of workers.
"""

import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["default_workers", "map_trials"]


def default_workers():
    return os.cpu_count() or 1


def map_trials(chunk_fn, cfg, trials, workers=1):
    if trials <= 0:
        return []
    if workers is None:
        workers = default_workers()
    if workers <= 1 or trials < 2:
        return chunk_fn(cfg, 0, trials)
    n_chunks = min(trials, 4 * workers)
    bounds = [trials * i // n_chunks for i in range(n_chunks + 1)]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(chunk_fn, cfg, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo
        ]
        for fut in futures:
            out.extend(fut.result())
    return out
