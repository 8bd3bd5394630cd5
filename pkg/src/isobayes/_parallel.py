"""Deterministic block-parallel map over an index range."""

from concurrent.futures import ProcessPoolExecutor

import numpy as np


def map_index_blocks(func, n: int, workers: int, *args) -> list:
    """Call ``func(indices, *args)`` over contiguous blocks of ``range(n)``.

    Results come back in index order, so any reduction over them is the same
    for every worker count.
    """
    indices = np.arange(n)
    if workers <= 1 or n <= 1:
        return [func(indices, *args)]
    blocks = np.array_split(indices, min(n, workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, blocks, *[[a] * len(blocks) for a in args]))
