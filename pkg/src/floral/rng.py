"""Portable pseudo-random generator for the attacker's randomized draws.

The attack schedule must replay bit-identically across platforms and library
versions, so the randomness used for label flips comes from splitmix64 (a
fixed, published 64-bit mixing recipe) rather than from numpy's generators,
whose streams are only stable within a numpy release.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """splitmix64 stream seeded with a 64-bit integer.

    Instances are cheap to clone, which lets callers fork an attack stream
    and replay it from a checkpoint (used by the stability tests).
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def clone(self) -> "SplitMix64":
        other = SplitMix64(0)
        other.state = self.state
        return other

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow requires n > 0")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def sample(self, pool: list[int], k: int) -> list[int]:
        """k distinct elements drawn uniformly from pool (partial Fisher-Yates)."""
        if k > len(pool):
            raise ValueError(f"cannot sample {k} from pool of {len(pool)}")
        items = list(pool)
        for i in range(k):
            j = i + self.randbelow(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items[:k]
