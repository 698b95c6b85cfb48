"""Bitmask encoding for subsets of a ground set {1, ..., n}.

Element i occupies bit i-1, so the empty set is 0 and {1, 2} is 0b11.
Masks are plain Python ints (arbitrary width); conversion helpers pack
them into uint64 block rows for the numeric kernels.
"""

from __future__ import annotations

import operator
from typing import Iterable, Iterator

import numpy as np

BLOCK_BITS = 64
BLOCK_MASK = (1 << BLOCK_BITS) - 1


def bit(element: int) -> int:
    """Mask of the singleton {element} (1-based)."""
    element = operator.index(element)  # numpy ints would poison the shift
    if element < 1:
        raise ValueError(f"elements are 1-based, got {element}")
    return 1 << (element - 1)


def mask_of(elements: Iterable[int]) -> int:
    """Mask of a set given as an iterable of 1-based elements."""
    m = 0
    for e in elements:
        b = bit(e)
        if m & b:
            raise ValueError(f"duplicate element {e}")
        m |= b
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    """Sorted 1-based elements of a mask. Doubles as the lex sort key."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return tuple(out)


def popcount(mask: int) -> int:
    return mask.bit_count()


def full_mask(n: int) -> int:
    return (1 << n) - 1


def iter_bits(mask: int) -> Iterator[int]:
    """Yield single-bit masks of `mask`, lowest first."""
    while mask:
        low = mask & -mask
        yield low
        mask ^= low


def submasks(mask: int) -> Iterator[int]:
    """All submasks of `mask` including 0 and mask itself (descending order)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def n_blocks(n: int) -> int:
    return (n + BLOCK_BITS - 1) // BLOCK_BITS


def mask_to_blocks(mask: int, nblocks: int) -> np.ndarray:
    """Pack one mask into a (nblocks,) uint64 row."""
    row = np.zeros(nblocks, dtype=np.uint64)
    for j in range(nblocks):
        # np.uint64() accepts the full unsigned range; plain item assignment
        # rejects Python ints at or above 2**63
        row[j] = np.uint64((mask >> (j * BLOCK_BITS)) & BLOCK_MASK)
    return row

def masks_to_blocks(masks: Iterable[int], nblocks: int) -> np.ndarray:
    """Pack masks into an (N, nblocks) uint64 matrix, row order preserved."""
    rows = [mask_to_blocks(m, nblocks) for m in masks]
    if not rows:
        return np.zeros((0, nblocks), dtype=np.uint64)
    return np.stack(rows)


def blocks_to_mask(row: np.ndarray) -> int:
    mask = 0
    for j in range(row.shape[0]):
        mask |= int(row[j]) << (j * BLOCK_BITS)
    return mask
