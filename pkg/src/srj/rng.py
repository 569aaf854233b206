"""Deterministic 64-bit PRNG used for every random draw in this package.

SplitMix64 (Steele, Lea, Flood 2014).  The generator is tiny, has a single
64-bit word of state, and produces the exact same sequence on every platform
and in every language, which is what we want for reproducible problem
generation and data collection.  The uniform() mapping keeps the top 53 bits,
so floats are exactly reproducible as well.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential splitmix64 stream seeded with an arbitrary 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return _mix(self._state)

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, n: int) -> list[float]:
        return [self.uniform() for _ in range(n)]

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection; exact for n << 2^64."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = MASK64 - (MASK64 % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def choice(self, items):
        return items[self.randint(len(items))]


def derive_seed(seed: int, *words: int) -> int:
    """Mix extra integer words into a seed to get independent substreams."""
    s = seed & MASK64
    for w in words:
        s = _mix((s ^ (w & MASK64)) + _GAMMA & MASK64)
    return s
