"""Order-preserving map over a process pool.

Results come back in input order whatever the worker count, so every
``--jobs`` value writes the same output. Randomness never depends on which
worker runs an item: callers spawn one ``SeedSequence`` child per item.
"""
from __future__ import annotations

import concurrent.futures as cf
import logging
import typing as t

import numpy as np

logger = logging.getLogger(__name__)

T = t.TypeVar('T')
R = t.TypeVar('R')


def parallel_map(fn: t.Callable[[T], R], items: t.Iterable[T], jobs: int = 1) -> t.List[R]:
    """``fn`` must be a module-level function when ``jobs > 1``."""
    items = list(items)
    if jobs < 1:
        raise ValueError(f'jobs must be >= 1, got {jobs}')
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (jobs * 4))
    logger.debug('mapping %d item(s) over %d worker(s), chunksize %d', len(items), jobs, chunk)
    with cf.ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


def spawn_seeds(root_seed: t.Optional[int], count: int) -> t.List[np.random.SeedSequence]:
    return np.random.SeedSequence(root_seed).spawn(count)
