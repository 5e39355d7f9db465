"""Binary linear algebra: GF(2) rank and Berlekamp-Massey."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def rank_gf2(rows: Iterable[int]) -> int:
    """Rank over GF(2) of a matrix whose rows are given as integer bitmasks."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
    return len(basis)


def matrix_rows(bits: np.ndarray, rows: int, cols: int) -> list[list[int]]:
    """Split ``bits`` into ``rows`` x ``cols`` matrices, filled row by row.

    Each matrix is returned as a list of row bitmasks (first bit = MSB).
    """
    count = len(bits) // (rows * cols)
    mats = np.asarray(bits[: count * rows * cols], dtype=np.uint64).reshape(count, rows, cols)
    weights = np.uint64(1) << np.arange(cols - 1, -1, -1, dtype=np.uint64)
    packed = (mats * weights).sum(axis=2, dtype=np.uint64)
    return [[int(v) for v in mat] for mat in packed]


def berlekamp_massey(bits: Sequence[int]) -> int:
    """Linear complexity (shortest LFSR length) of a binary sequence."""
    c = 1  # connection polynomial, bit i = coefficient of x^i
    b = 1
    length = 0
    last = -1
    window = 0  # bit i holds s[n - i]
    for n, bit in enumerate(bits):
        window = (window << 1) | (int(bit) & 1)
        if (c & window).bit_count() & 1:
            t = c
            c ^= b << (n - last)
            if 2 * length <= n:
                length = n + 1 - length
                last = n
                b = t
    return length
