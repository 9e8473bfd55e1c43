"""Deterministic, platform-independent randomness for split protocols.

Every randomized step in this package draws from SplitMix64, the 64-bit
generator published by Sebastiano Vigna (http://prng.di.unimi.it/splitmix64.c).
It was chosen because the whole state is one uint64, the update is three
multiply-xor-shift lines that behave identically on every platform, and
reference outputs are easy to pin in tests.

Shuffling is a descending-index Fisher-Yates: for i = n-1 .. 1 swap
position i with position j = next() % (i + 1).  The modulo draw has a
vanishing bias for the list sizes seen here (dozens of items against a
64-bit range) and keeps the algorithm reproducible from the written
description alone.

Reference vectors (first three outputs), checked against the reference C
implementation:

    seed 0                     -> e220a8397b1dcdaf, 6e789e6aa1b965f4, 06c45d188009454f
    seed 42                    -> bdd732262feb6e95, 28efe333b266f103, 47526757130f9f52
    seed 0x123456789abcdef0    -> 161922c645ce50e8, ad760cafa1697b60, 3501ff44902ca50d
"""

from __future__ import annotations

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Vigna's splitmix64 generator over a single 64-bit word of state."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform-ish draw in [0, bound) via modulo reduction."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, descending index order."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
