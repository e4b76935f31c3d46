"""Pure-numpy fallback kernels.

Selected when the env flag ICCHECK_BACKEND=numpy is set or numba is not
importable. Must produce bit-identical floats to the numba backend and to
the pure-Python reference in :mod:`iccheck.similarity`: per-window sums
accumulate in ascending query-line order, and every Dice value is one
exact integer-to-float division.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def dice_row(
    qdata: np.ndarray,
    data: np.ndarray,
    offsets: np.ndarray,
    lengths: np.ndarray,
) -> np.ndarray:
    """Dice of one query line against every interned corpus line.

    ``qdata`` is the sorted unique bigram-id array of the query line;
    ``data``/``offsets`` the corpus CSR buffer. ``lengths`` is unused here
    (set semantics need only the bigram counts) but kept for signature
    parity with callers that have it at hand.
    """
    n_lines = offsets.size - 1
    nq = qdata.size
    nbig = np.diff(offsets)
    if data.size and nq:
        idx = np.searchsorted(qdata, data)
        idx_clamped = np.minimum(idx, nq - 1)
        member = qdata[idx_clamped] == data
        cs = np.zeros(data.size + 1, dtype=np.int64)
        np.cumsum(member, out=cs[1:])
        inter = cs[offsets[1:]] - cs[offsets[:-1]]
    else:
        inter = np.zeros(n_lines, dtype=np.int64)
    denom = nbig + nq
    safe = np.maximum(denom, 1)
    return np.where(denom == 0, 1.0, (2.0 * inter) / safe)


def window_scores(
    dice_mat: np.ndarray,
    uids: np.ndarray,
    weights: np.ndarray,
    weight_sum: float,
    step: int,
) -> np.ndarray:
    """Weighted window averages over one file's line-uid sequence.

    ``dice_mat[i, u]`` is the Dice of query line ``i`` vs interned line
    ``u``. Window ``s`` (0-based start, stride ``step``) pairs query line
    ``i`` with file line ``s+i``. The accumulation order per window is
    identical to the scalar reference loop.
    """
    m = dice_mat.shape[0]
    n = uids.size - m + 1
    if n <= 0:
        return np.empty(0, dtype=np.float64)
    starts = np.arange(0, n, step, dtype=np.int64)
    acc = np.zeros(starts.size, dtype=np.float64)
    for i in range(m):
        acc += weights[i] * dice_mat[i, uids[starts + i]]
    return acc / weight_sum
