"""Small bit-reproducible pseudo random generator.

The stream is xorshift64* (Vigna, 2016) seeded through one round of
splitmix64, so any integer seed (including 0) gives a well-mixed, nonzero
state. Every sampler in the package draws from this class so that a seed
fully determines debris fields, exploration and Monte-Carlo rollouts.

Constants:
    splitmix64 increment 0x9E3779B97F4A7C15, multipliers 0xBF58476D1CE4E5B9
    and 0x94D049BB133111EB; xorshift shifts (12, 25, 27); output multiplier
    0x2545F4914F6CDD1D. Floats use the top 53 bits.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    """xorshift64* generator with a few convenience samplers."""

    def __init__(self, seed: int):
        state = splitmix64(int(seed) & _MASK)
        self._state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        # Box-Muller, one variate per call (the sine branch is discarded)
        u1 = 1.0 - self.random()
        u2 = self.random()
        return mean + std * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def child(self, stream: int) -> "XorShift64Star":
        """Independent generator derived from this one's state and a stream id."""
        return XorShift64Star(splitmix64(self._state ^ splitmix64(stream)))


def derive_seed(seed: int, *stream: int) -> int:
    """Deterministically combine a base seed with stream identifiers."""
    s = splitmix64(int(seed) & _MASK)
    for k in stream:
        s = splitmix64(s ^ (int(k) & _MASK))
    return s
