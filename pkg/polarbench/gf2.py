"""Gaussian elimination over GF(2) on bit-packed rows."""

from typing import List, Optional, Tuple

import numpy as np

from .exceptions import InvalidInputError


def gf2_eliminate(matrix: np.ndarray, ncols: Optional[int] = None) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form of a 0/1 matrix and its pivot columns.

    Pivots are searched in the first ``ncols`` columns only, which leaves an
    augmented right-hand side untouched as a pivot candidate. Rows are packed
    eight columns per byte and every pivot clears its column in all other
    rows with one vectorized XOR.
    """
    bits = np.asarray(matrix, dtype=np.uint8)
    if bits.ndim != 2:
        raise InvalidInputError("gf2_eliminate needs a 2-D matrix")
    m, total = bits.shape
    ncols = total if ncols is None else ncols
    packed = np.packbits(bits, axis=1, bitorder="little")
    pivots: List[int] = []
    i = 0
    for j in range(ncols):
        if i >= m:
            break
        byte, mask = j >> 3, np.uint8(1 << (j & 7))
        below = (packed[i:, byte] & mask) != 0
        if not below.any():
            continue
        k = i + int(np.argmax(below))
        if k != i:
            packed[[i, k]] = packed[[k, i]]
        hits = (packed[:, byte] & mask) != 0
        hits[i] = False
        packed[hits] ^= packed[i]
        pivots.append(j)
        i += 1
    reduced = np.unpackbits(packed, axis=1, count=total, bitorder="little")
    return reduced, pivots


def gf2_rank(matrix: np.ndarray) -> int:
    return len(gf2_eliminate(matrix)[1])


def gf2_solve(a: np.ndarray, b: np.ndarray) -> Tuple[Optional[np.ndarray], int, bool]:
    """Solve a x = b over GF(2).

    Returns ``(x, rank, consistent)``; ``x`` is None unless the solution is unique.
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8).reshape(-1, 1)
    if a.shape[0] != b.shape[0]:
        raise InvalidInputError("Right-hand side length must match the number of rows")
    unknowns = a.shape[1]
    reduced, pivots = gf2_eliminate(np.hstack([a, b]), ncols=unknowns)
    rank = len(pivots)
    consistent = not reduced[rank:, -1].any()
    if not consistent or rank < unknowns:
        return None, rank, consistent
    x = np.zeros(unknowns, dtype=np.uint8)
    x[pivots] = reduced[:rank, -1]
    return x, rank, consistent
