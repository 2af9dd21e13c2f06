"""Seedable, portable random number generation.

All randomized routines in this package draw from xoshiro256**, seeded
through a splitmix64 expansion of a user-supplied 64-bit seed.  The
generator identity is part of the reproducibility contract: two runs with
the same seed (and stream index) consume identical draw sequences, whether
the draws happen in pure Python or inside the compiled chain kernels,
which share the same state array.

Stream splitting: parallel chains use ``derive_state(seed, stream=c)`` for
chain index ``c``.  The stream index is folded into the splitmix64 state
before expansion, so distinct streams are statistically independent.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """splitmix64 output function (avalanche)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_state(seed: int, stream: int = 0) -> np.ndarray:
    """Expand (seed, stream) into a 4-word xoshiro256** state array."""
    s = _mix64(seed & MASK64)
    s = _mix64(s ^ (stream & MASK64))
    out = np.empty(4, dtype=np.uint64)
    for i in range(4):
        s = (s + _GOLDEN) & MASK64
        out[i] = _mix64(s)
    if not out.any():
        out[0] = 1  # all-zero state is invalid for xoshiro
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** generator over a shared numpy uint64 state array.

    The ``state`` array can be handed to the compiled kernels, which
    continue the exact same draw sequence in place.
    """

    def __init__(self, seed: int = 0, stream: int = 0):
        self.state = derive_state(seed, stream)

    def next_u64(self) -> int:
        s = self.state
        s0, s1, s2, s3 = int(s[0]), int(s[1]), int(s[2]), int(s[3])
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        s[0], s[1], s[2], s[3] = s0, s1, s2, s3
        return result

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via masked rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        mask = (1 << (n - 1).bit_length()) - 1 if n > 1 else 0
        while True:
            x = self.next_u64() & mask
            if x < n:
                return x

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def shuffle(self, arr) -> None:
        """In-place Fisher-Yates shuffle (mutable sequence or 1-d array)."""
        for i in range(len(arr) - 1, 0, -1):
            j = self.randbelow(i + 1)
            arr[i], arr[j] = arr[j], arr[i]
