"""Numba-accelerated kernels (default backend when numba imports).

Compiled with ``cache=True`` so repeated CLI invocations reuse the on-disk
cache, and ``nogil=True`` so the per-file worker pool gets real
parallelism. The float operation order matches the numpy backend and the
pure-Python reference exactly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True, nogil=True)
def _dice_row(qdata, data, offsets, out):
    nq = qdata.size
    for u in range(offsets.size - 1):
        lo, hi = offsets[u], offsets[u + 1]
        i, j = lo, 0
        inter = 0
        while i < hi and j < nq:
            x = data[i]
            y = qdata[j]
            if x == y:
                inter += 1
                i += 1
                j += 1
            elif x < y:
                i += 1
            else:
                j += 1
        denom = (hi - lo) + nq
        if denom == 0:
            out[u] = 1.0
        else:
            out[u] = (2.0 * inter) / denom


@njit(cache=True, nogil=True)
def _window_scores(dice_mat, uids, weights, weight_sum, step, out):
    m = dice_mat.shape[0]
    n_starts = out.size
    for k in range(n_starts):
        s = k * step
        total = 0.0
        for i in range(m):
            total += weights[i] * dice_mat[i, uids[s + i]]
        out[k] = total / weight_sum


def dice_row(
    qdata: np.ndarray,
    data: np.ndarray,
    offsets: np.ndarray,
    lengths: np.ndarray,
) -> np.ndarray:
    out = np.empty(offsets.size - 1, dtype=np.float64)
    _dice_row(qdata, data, offsets, out)
    return out


def window_scores(
    dice_mat: np.ndarray,
    uids: np.ndarray,
    weights: np.ndarray,
    weight_sum: float,
    step: int,
) -> np.ndarray:
    m = dice_mat.shape[0]
    n = uids.size - m + 1
    if n <= 0:
        return np.empty(0, dtype=np.float64)
    n_starts = (n + step - 1) // step
    out = np.empty(n_starts, dtype=np.float64)
    _window_scores(dice_mat, uids, weights, weight_sum, step, out)
    return out


def warmup() -> None:
    """Force JIT compilation (or cache load) of both kernels."""
    data, offsets = np.array([1, 2], dtype=np.int64), np.array([0, 2], dtype=np.int64)
    lengths = np.array([3], dtype=np.int64)
    row = dice_row(np.array([2, 3], dtype=np.int64), data, offsets, lengths)
    window_scores(
        row.reshape(1, -1),
        np.zeros(1, dtype=np.int64),
        np.ones(1, dtype=np.float64),
        1.0,
        1,
    )
