"""Bit-label arithmetic, parity classes, and Majorana action on basis labels.

Labels are plain machine integers with the qubit count carried alongside.
Bit i (1-indexed, leftmost = qubit 1) of an n-bit label x is
``(x >> (n - i)) & 1``, so for n = 4 label 3 is the string 0011 and label
12 is 1100.  Everything here is a pure function of immutable values.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

MAX_QUBITS = 16


class MajoranaAction(NamedTuple):
    """Result of applying one Majorana generator to a basis label."""

    label: int
    phase: complex


def hamming_weight(x: int) -> int:
    """Number of set bits of x."""
    return int(x).bit_count()


def hamming_distance(x: int, y: int) -> int:
    """Number of positions where x and y differ."""
    return int(x ^ y).bit_count()


def parity(x: int) -> int:
    """Hamming weight modulo 2."""
    return int(x).bit_count() & 1


def bit_at(x: int, i: int, n: int) -> int:
    """Bit i of x, 1-indexed with position 1 the leftmost qubit."""
    if not 1 <= i <= n:
        raise ValueError(f"bit position {i} out of range for n={n}")
    return (x >> (n - i)) & 1


def diff_positions(x: int, y: int, n: int) -> list[int]:
    """Positions where x and y differ, ascending, 1-indexed from the left."""
    d = x ^ y
    return [i for i in range(1, n + 1) if (d >> (n - i)) & 1]


def set_positions(x: int, n: int) -> list[int]:
    """Positions of the set bits of x, ascending."""
    return [i for i in range(1, n + 1) if (x >> (n - i)) & 1]


def flip_bits(x: int, positions: Iterable[int], n: int) -> int:
    """Flip the given 1-indexed positions of x.  Involution for fixed positions."""
    for i in positions:
        if not 1 <= i <= n:
            raise ValueError(f"flip position {i} out of range for n={n}")
        x ^= 1 << (n - i)
    return x


def label_from_positions(positions: Iterable[int], n: int) -> int:
    """Label whose set bits are exactly the given positions."""
    return flip_bits(0, positions, n)


def _check_qubit_count(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count {n} outside supported range 1..{MAX_QUBITS}")


@lru_cache(maxsize=None)
def _even_labels(n: int) -> tuple[int, ...]:
    return tuple(x for x in range(1 << n) if x.bit_count() % 2 == 0)


def enumerate_even_labels(n: int) -> list[int]:
    """All 2^(n-1) even-weight n-bit labels, ascending."""
    _check_qubit_count(n)
    return list(_even_labels(n))


@lru_cache(maxsize=None)
def even_label_array(n: int) -> np.ndarray:
    """Even labels as a read-only int64 array, ascending."""
    _check_qubit_count(n)
    arr = np.array(_even_labels(n), dtype=np.int64)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def odd_label_array(n: int) -> np.ndarray:
    """Odd-weight labels as a read-only int64 array, ascending."""
    _check_qubit_count(n)
    arr = np.array([x for x in range(1 << n) if x.bit_count() % 2 == 1], dtype=np.int64)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def even_index_table(n: int) -> np.ndarray:
    """Label -> index into the even enumeration; -1 for odd labels."""
    table = np.full(1 << n, -1, dtype=np.int64)
    table[even_label_array(n)] = np.arange(1 << (n - 1))
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def odd_index_table(n: int) -> np.ndarray:
    """Label -> index into the odd enumeration; -1 for even labels."""
    table = np.full(1 << n, -1, dtype=np.int64)
    table[odd_label_array(n)] = np.arange(1 << (n - 1))
    table.setflags(write=False)
    return table


def even_index(n: int, label: int) -> int:
    """Index of an even-weight label in the even enumeration."""
    idx = int(even_index_table(n)[label])
    if idx < 0:
        raise ValueError(f"label {label} has odd weight")
    return idx


def majorana_apply(k: int, x: int, n: int) -> MajoranaAction:
    """Action of the k-th Majorana generator on basis label x.

    Under the Jordan-Wigner encoding the generator with odd index 2m-1
    acts as Z_1 ... Z_{m-1} X_m and the one with even index 2m as
    Z_1 ... Z_{m-1} Y_m, so the sign tracks the bits strictly left of
    position m, and the Y adds a factor i * (-1)^{x_m}.
    """
    if not 1 <= k <= 2 * n:
        raise ValueError(f"Majorana index {k} out of range for n={n}")
    m = (k + 1) // 2
    prefix = x >> (n - m + 1)
    phase: complex = -1.0 if prefix.bit_count() & 1 else 1.0
    if k % 2 == 0:
        phase *= 1j if not (x >> (n - m)) & 1 else -1j
    return MajoranaAction(x ^ (1 << (n - m)), phase)
