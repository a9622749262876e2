"""Compensated, order-fixed summation.

Blocks have a fixed size, each block is summed with ``math.fsum`` and the
block results are combined with ``fsum`` in block order.  The answer does
not depend on how many workers summed the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

BLOCK = 1 << 15


def _block_sums(x: np.ndarray, workers: int) -> list[float]:
    chunks = [x[i : i + BLOCK] for i in range(0, len(x), BLOCK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(math.fsum, chunks))
    return [math.fsum(c) for c in chunks]


def _real_sum(x: np.ndarray, workers: int) -> float:
    return math.fsum(_block_sums(x, workers))


def csum(x, workers: int = 1):
    """Compensated sum of a real or complex array."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return complex(_real_sum(x.real, workers), _real_sum(x.imag, workers))
    return _real_sum(x.astype(float), workers)


def cmean(x, workers: int = 1):
    return csum(x, workers) / len(x)


def prefix_sums(x, ends: Sequence[int], workers: int = 1) -> list:
    """``csum(x[:n])`` for each ``n`` in ``ends``; bit-identical to ``csum``."""
    x = np.asarray(x)
    parts = [x.real, x.imag] if np.iscomplexobj(x) else [x.astype(float)]
    full = max(ends) // BLOCK * BLOCK if len(ends) else 0
    blocks = [_block_sums(part[:full], workers) for part in parts]
    out = []
    for n in ends:
        k = n // BLOCK
        vals = []
        for part, bs in zip(parts, blocks):
            tail = part[k * BLOCK : n]
            vals.append(math.fsum(bs[:k] + ([math.fsum(tail)] if len(tail) else [])))
        out.append(complex(*vals) if len(vals) == 2 else vals[0])
    return out
