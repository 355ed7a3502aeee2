"""
O(N²) force and majorant sums

Rows (target particles) are processed in chunks, optionally spread over a
thread pool. In deterministic mode the chunk size is fixed, so every row is
reduced the same way whatever the thread count and the result is bit-stable.
Fast mode uses one chunk per thread, up to FAST_CHUNK_LIMIT rows.
"""
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from vpfplab.kernels.coulomb import ell, regularized_kernel

#: Rows per chunk in deterministic mode
DETERMINISTIC_CHUNK = 64
#: Largest chunk of fast mode, bounds the (rows, sources, 3) buffers
FAST_CHUNK_LIMIT = 256


def row_chunks(n, threads=1, deterministic=True):
    """
    ``(start, stop)`` row ranges covering ``range(n)``
    """
    if deterministic:
        size = DETERMINISTIC_CHUNK
    else:
        size = min(math.ceil(n / max(threads, 1)), FAST_CHUNK_LIMIT)
    return [(start, min(start + size, n)) for start in range(0, n, size)]


def map_rows(rows, n, threads=1, deterministic=True):
    """
    Concatenate ``rows(start, stop)`` over all chunks of ``range(n)``
    """
    chunks = row_chunks(n, threads, deterministic)
    if threads <= 1 or len(chunks) == 1:
        return np.concatenate([rows(*chunk) for chunk in chunks])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.concatenate(list(pool.map(lambda c: rows(*c), chunks)))


def _check_size(state):
    if len(state) < 2:
        raise ValueError("pairwise sums need at least 2 particles, got {}"
                         .format(len(state)))


def pairwise_force(config, profile, state, threads=1, deterministic=True):
    """
    K^N(X)_i = 1/(n-1) Σ_{j≠i} k^N(x_i - x_j), shape (n, 3)

    The cut-off comes from `config`, the weight from the size n of `state`,
    so the same function drives a reference ensemble of another size.
    k^N(0) = 0 makes the j = i term vanish
    """
    _check_size(state)
    x = state.positions

    def rows(start, stop):
        differences = x[start:stop, np.newaxis, :] - x[np.newaxis, :, :]
        return regularized_kernel(config, profile, differences).sum(axis=1)

    return map_rows(rows, len(x), threads, deterministic) / (len(x) - 1)


def pairwise_ell(config, state, threads=1, deterministic=True):
    """
    L^N(X)_i = 1/(n-1) Σ_{j≠i} ℓ^N(x_i - x_j), shape (n,)
    """
    _check_size(state)
    x = state.positions

    def rows(start, stop):
        differences = x[start:stop, np.newaxis, :] - x[np.newaxis, :, :]
        values = ell(config, differences)
        # ℓ^N(0) = N^{3δ} is not zero, the diagonal has to go explicitly
        values[np.arange(stop - start), np.arange(start, stop)] = 0.0
        return values.sum(axis=1)

    return map_rows(rows, len(x), threads, deterministic) / (len(x) - 1)


def reference_force(config, profile, sources, targets, threads=1,
                    deterministic=True):
    """
    1/M Σ_j k^N(t - y_j) for every target t, over M source positions y_j

    :param sources: (M, 3) positions
    :param targets: (K, 3) positions
    """
    sources = np.asarray(sources, dtype=float)
    targets = np.asarray(targets, dtype=float)

    def rows(start, stop):
        differences = (targets[start:stop, np.newaxis, :]
                       - sources[np.newaxis, :, :])
        return regularized_kernel(config, profile, differences).sum(axis=1)

    return map_rows(rows, len(targets), threads, deterministic) / len(sources)


def reference_ensemble_force(config, profile, ensemble, x):
    """
    The Monte Carlo mean field 1/M Σ_j k^N(x - y_j) of an ensemble at the
    point x
    """
    if len(ensemble) < 1:
        raise ValueError("the reference ensemble is empty")
    return reference_force(config, profile, ensemble.positions,
                           np.reshape(np.asarray(x, dtype=float), (1, 3)))[0]
