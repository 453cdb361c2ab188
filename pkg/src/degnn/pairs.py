"""Linear indexing of unordered node pairs (i < j) over n nodes.

Pair (i, j) maps to rank i*(2n-i-1)/2 + (j-i-1), enumerating the strict
upper triangle row by row. Used by the samplers so they can draw uniform
pairs without materializing the full pair list.
"""

import numpy as np


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def encode(i, j, n: int):
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


def decode(rank, n: int):
    """Inverse of encode, vectorized; float estimate plus integer fix-up."""
    rank = np.asarray(rank, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * rank)) / 2.0).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    # correct rounding drift at row boundaries
    start = i * (2 * n - i - 1) // 2
    too_high = start > rank
    while np.any(too_high):
        i[too_high] -= 1
        start = i * (2 * n - i - 1) // 2
        too_high = start > rank
    next_start = (i + 1) * (2 * n - i - 2) // 2
    too_low = rank >= next_start
    while np.any(too_low):
        i[too_low] += 1
        next_start = (i + 1) * (2 * n - i - 2) // 2
        too_low = rank >= next_start
    start = i * (2 * n - i - 1) // 2
    j = rank - start + i + 1
    return i, j
