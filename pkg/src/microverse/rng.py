"""Deterministic, platform-independent random number generator.

SplitMix64 with floating-point draws built by fixed mantissa construction
(top 53 bits of a 64-bit word scaled by 2**-53), so identical seeds yield
bit-identical streams on every platform. State is held in a small object
threaded explicitly through callers; there is no global generator.
"""
from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF


class Rng:
    """Seedable SplitMix64 stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform draw in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform draw in [lo, hi); degenerate lo == hi returns lo."""
        if lo > hi:
            raise ValueError(f"uniform: lo={lo} > hi={hi}")
        return lo + self.random() * (hi - lo)

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n). Uses rejection to avoid modulo bias."""
        if n <= 0:
            raise ValueError("randint: n must be positive")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def fork(self) -> "Rng":
        """Child generator decorrelated from this stream."""
        return Rng(self.next_u64() ^ 0xA5A5A5A5A5A5A5A5)

    def copy(self) -> "Rng":
        c = Rng(0)
        c.state = self.state
        return c
