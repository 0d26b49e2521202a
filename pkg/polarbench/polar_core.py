"""Bit-index arithmetic and the polar transform x = u G2^(x)n.

Bit blocks are numpy ``uint8`` arrays whose last axis has length N = 2^n,
index 0 first. Leading axes are treated as a batch, so every transform here
works on a single block or on a stack of blocks alike. Packed storage uses
``bitorder="little"``: bit 0 of byte 0 holds index 0.
"""

from functools import lru_cache
from typing import Any

import numpy as np

from .exceptions import InvalidInputError


def block_exponent(length: int) -> int:
    """Return n for a block of length 2^n, or raise InvalidInputError."""
    if length < 1 or length & (length - 1):
        raise InvalidInputError(f"Block length must be a power of two, got {length}")
    return length.bit_length() - 1


def as_bits(block: Any) -> np.ndarray:
    """Copy ``block`` into a fresh uint8 array, checking values and length."""
    bits = np.array(block, dtype=np.uint8, copy=True)
    if bits.ndim == 0:
        raise InvalidInputError("A bit block needs at least one axis")
    block_exponent(bits.shape[-1])
    if bits.size and bits.max() > 1:
        raise InvalidInputError("Bit blocks may only contain 0 and 1")
    return bits


def _butterfly_inplace(bits: np.ndarray) -> np.ndarray:
    n = block_exponent(bits.shape[-1])
    lead = bits.shape[:-1]
    for h in range(n):
        half = 1 << h
        view = bits.reshape(lead + (-1, 2, half))
        view[..., 0, :] ^= view[..., 1, :]
    return bits


def polar_transform(u: Any) -> np.ndarray:
    """Compute u G2^(x)n over GF(2) with n butterfly passes.

    The transform is its own inverse. Stage order does not matter because the
    stages commute; this one runs from the least significant index bit up.
    """
    return _butterfly_inplace(as_bits(u))


def transpose_transform(u: Any) -> np.ndarray:
    """Compute u (G2^(x)n)^T, the generator map of a dual-orientation code.

    (G2^(x)n)^T equals P G2^(x)n P where P reverses the index order.
    """
    bits = as_bits(u)[..., ::-1].copy()
    return np.ascontiguousarray(_butterfly_inplace(bits)[..., ::-1])


def _check_index(i: int, n: int) -> None:
    if n < 0:
        raise InvalidInputError(f"Block exponent must be non-negative, got {n}")
    if not 0 <= i < (1 << n):
        raise InvalidInputError(f"Index {i} outside [0, 2^{n})")


def bit_reversal(i: int, n: int) -> int:
    """Reverse the n-bit binary expansion of i."""
    _check_index(i, n)
    out = 0
    for _ in range(n):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


@lru_cache(maxsize=None)
def _bit_reversal_permutation(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(idx)
    for k in range(n):
        out |= ((idx >> k) & 1) << (n - 1 - k)
    out.setflags(write=False)
    return out


def bit_reversal_permutation(n: int) -> np.ndarray:
    """Array whose entry i is bit_reversal(i, n). Read-only and cached."""
    if n < 0:
        raise InvalidInputError(f"Block exponent must be non-negative, got {n}")
    return _bit_reversal_permutation(n)


def index_weight(i: int) -> int:
    """Number of ones in the binary expansion of i."""
    if i < 0:
        raise InvalidInputError(f"Index must be non-negative, got {i}")
    return bin(i).count("1")


def index_weights(n: int) -> np.ndarray:
    """wt(i) for every i in [0, 2^n)."""
    idx = np.arange(1 << n, dtype=np.int64)
    weights = np.zeros_like(idx)
    for k in range(n):
        weights += (idx >> k) & 1
    return weights


def generator_row_weight(i: int) -> int:
    """Hamming weight 2^wt(i) of row i of G2^(x)n."""
    return 1 << index_weight(i)


def indicator(i: int, n: int) -> np.ndarray:
    """Length-2^n block with a single one at position i."""
    _check_index(i, n)
    block = np.zeros(1 << n, dtype=np.uint8)
    block[i] = 1
    return block


def hamming_weight(block: np.ndarray) -> Any:
    """Number of ones along the last axis."""
    return np.count_nonzero(block, axis=-1)


def pack_bits(block: np.ndarray) -> bytes:
    """Pack a 1-D bit block LSB-first (index 0 is bit 0 of byte 0)."""
    return np.packbits(np.asarray(block, dtype=np.uint8), bitorder="little").tobytes()


def unpack_bits(data: bytes, length: int) -> np.ndarray:
    """Inverse of pack_bits for a block of ``length`` bits."""
    raw = np.frombuffer(data, dtype=np.uint8)
    if raw.size * 8 < length:
        raise InvalidInputError(f"Need {length} bits, got {raw.size * 8}")
    return np.unpackbits(raw, count=length, bitorder="little")
