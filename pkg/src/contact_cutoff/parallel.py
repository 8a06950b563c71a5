"""Order-deterministic replica map over a process pool."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def map_replicas(fn, jobs, workers: int = 1, chunksize: int | None = None) -> list:
    """``[fn(j) for j in jobs]``, optionally across ``workers`` processes.

    Results come back in job order, and each job carries its own seed, so the
    output does not depend on ``workers``.
    """
    jobs = list(jobs)
    if workers is None or workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    if chunksize is None:
        chunksize = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=chunksize))
