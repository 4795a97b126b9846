"""Lehmer multiplicative generator (Park & Miller minimal standard).

x' = 16807 * x mod (2^31 - 1).  State 0 is not a valid Lehmer state, so
16-bit seeds of 0 are remapped to 1.  Coefficient draws for the random
linear code depend bit-for-bit on this recurrence, so it stays hand-rolled
with plain integer arithmetic.
"""

from __future__ import annotations

MODULUS = 2**31 - 1
MULTIPLIER = 16807


def prng_next(state: int) -> tuple[int, int]:
    """Advance one step; returns (next_state, value) where value == next_state."""
    if not 1 <= state <= MODULUS - 1:
        raise ValueError(f"Lehmer state out of range: {state}")
    nxt = (MULTIPLIER * state) % MODULUS
    return nxt, nxt


def seed_prng_16(seed16: int) -> int:
    """Map a 16-bit wire seed to a valid initial state (0 remaps to 1)."""
    if not 0 <= seed16 <= 0xFFFF:
        raise ValueError(f"seed must fit 16 bits: {seed16}")
    return seed16 if seed16 != 0 else 1


class ParkMiller:
    """Stateful wrapper around the recurrence."""

    __slots__ = ("x",)

    def __init__(self, state: int = 1):
        if not 1 <= state <= MODULUS - 1:
            raise ValueError(f"Lehmer state out of range: {state}")
        self.x = state

    @classmethod
    def from_seed16(cls, seed16: int) -> "ParkMiller":
        return cls(seed_prng_16(seed16))

    def next(self) -> int:
        self.x = (MULTIPLIER * self.x) % MODULUS
        return self.x


def sequence_from(state: int, count: int):
    """The next count values of the recurrence as a numpy uint64 vector.

    Equals count successive next() calls: x * 16807^j mod M stays below
    2^46 for 31-bit states, so plain uint64 products suffice.
    """
    import numpy as np

    global _POWERS
    if _POWERS is None or len(_POWERS) <= count:
        n = max(count + 1, 1024)
        pows = [1] * n
        for j in range(1, n):
            pows[j] = (pows[j - 1] * MULTIPLIER) % MODULUS
        _POWERS = np.array(pows, dtype=np.uint64)
    return (np.uint64(state) * _POWERS[1 : count + 1]) % np.uint64(MODULUS)


_POWERS = None
