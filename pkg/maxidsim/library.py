"""
Library of utility functions shared by the simulators and the harness.
"""
import multiprocessing
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm


def reciprocal(a):
    """ Reciprocal with the extended conventions 1/0 = inf and 1/inf = 0

    Maps maximum-type samples X to hitting times T = 1/X and back.
    """
    if isinstance(a, np.ndarray):
        with np.errstate(divide='ignore'):
            return np.true_divide(1.0, a)
    if a == 0:
        return np.inf
    return 1.0 / a


def pointwise_max(rows: Iterable[np.ndarray], size: int) -> np.ndarray:
    """ Coordinatewise maximum of equally sized rows, zero if there are none

    Uses the convention max over the empty set = 0.
    """
    out = np.zeros(size, dtype=float)
    for row in rows:
        np.maximum(out, row, out=out)
    return out


def ecdf(sample: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """ Sorted sample and right-continuous empirical CDF values i/n """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    return x, np.arange(1, n + 1) / n


def parallelize_replicates(func: Callable[[Any], Any], tasks: List[Any],
                           n_cores: Optional[int] = None,
                           progress: bool = False) -> List[Any]:
    """
    A helper function to run independent replicates in parallel.
    Parameters
    ----------
        func: Picklable top-level function applied to each task
        tasks: One entry per replicate. The output keeps this order
        n_cores: Number of processes used. 1 runs in-process,
            None uses every available core.
        progress: Show a tqdm progress bar
    """
    if n_cores is None:
        n_cores = multiprocessing.cpu_count()
    if n_cores <= 1 or len(tasks) <= 1:
        return [func(task) for task in tqdm(tasks, disable=not progress)]

    pool = multiprocessing.Pool(n_cores)
    try:
        results = list(tqdm(pool.imap(func, tasks), total=len(tasks),
                            disable=not progress))
    finally:
        pool.close()
        pool.join()
    return results
