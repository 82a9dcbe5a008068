"""PCG32 random number generator and seed derivation.

Every random draw in the package goes through :class:`PCG32` so that datasets,
model initialisation and bootstrap resampling reproduce bit-for-bit on any
platform. The generator is the reference ``pcg32`` (XSH-RR output, 64-bit LCG
state) from O'Neill's PCG family:

* multiplier ``6364136223846793005``
* default stream ``1442695040888963407 >> 1`` (increment ``1442695040888963407``)
* seeding as in ``pcg32_srandom_r``: ``state = 0; inc = (seq << 1) | 1; step;
  state += initstate; step``.
"""

from __future__ import annotations

import hashlib
import math
import struct

import numpy as np

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1
MULTIPLIER = 6364136223846793005
DEFAULT_INCREMENT = 1442695040888963407
DEFAULT_STREAM = DEFAULT_INCREMENT >> 1


def _output(old: int) -> int:
    xorshifted = (((old >> 18) ^ old) >> 27) & MASK32
    rot = old >> 59
    return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & MASK32


class PCG32:
    """Minimal PCG32 with scalar and bulk draws.

    Bulk draws (:meth:`next_u32_array`) produce exactly the values that the
    same number of scalar :meth:`next_u32` calls would.
    """

    __slots__ = ("state", "inc")

    def __init__(self, seed: int, stream: int = DEFAULT_STREAM):
        self.state = 0
        self.inc = ((stream << 1) | 1) & MASK64
        self._step()
        self.state = (self.state + (seed & MASK64)) & MASK64
        self._step()

    def _step(self) -> None:
        self.state = (self.state * MULTIPLIER + self.inc) & MASK64

    def next_u32(self) -> int:
        old = self.state
        self._step()
        return _output(old)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits (two draws)."""
        a = self.next_u32() >> 5
        b = self.next_u32() >> 6
        return (a * 67108864.0 + b) / 9007199254740992.0

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, bound: int) -> int:
        """Unbiased integer in [0, bound) (``pcg32_boundedrand`` rejection)."""
        if bound <= 0 or bound > MASK32 + 1:
            raise ValueError("bound must be in [1, 2**32]")
        threshold = ((MASK32 + 1) - bound) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def randint(self, low: int, high: int) -> int:
        """Integer in the closed range [low, high]."""
        return low + self.randbelow(high - low + 1)

    def normal(self) -> float:
        """Standard normal via Box-Muller (one value per two uniforms)."""
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        idx = list(range(n))
        self.shuffle(idx)
        return idx

    def choices(self, n: int, k: int) -> np.ndarray:
        """``k`` indices drawn uniformly from [0, n) with replacement."""
        return np.array([self.randbelow(n) for _ in range(k)], dtype=np.int64)

    def next_u32_array(self, n: int) -> np.ndarray:
        """``n`` successive outputs, computed with LCG jump-ahead in numpy."""
        if n <= 0:
            return np.zeros(0, dtype=np.uint32)
        a = np.full(n, MULTIPLIER, dtype=np.uint64)
        a[0] = 1
        with np.errstate(over="ignore"):
            powers = np.cumprod(a, dtype=np.uint64)  # a**i mod 2**64
            offsets = np.empty(n, dtype=np.uint64)
            offsets[0] = 0
            # c * (1 + a + ... + a**(i-1))
            offsets[1:] = np.cumsum(powers[:-1], dtype=np.uint64) * np.uint64(self.inc)
            states = powers * np.uint64(self.state) + offsets
        xorshifted = (((states >> np.uint64(18)) ^ states) >> np.uint64(27)) & np.uint64(MASK32)
        rot = states >> np.uint64(59)
        left = (np.uint64(32) - rot) & np.uint64(31)
        out = ((xorshifted >> rot) | (xorshifted << left)) & np.uint64(MASK32)
        last = int(states[-1])
        self.state = (last * MULTIPLIER + self.inc) & MASK64
        return out.astype(np.uint32)

    def random_array(self, n: int) -> np.ndarray:
        """``n`` floats in [0, 1), identical to ``n`` calls of :meth:`random`."""
        raw = self.next_u32_array(2 * n).astype(np.float64)
        a = np.floor(raw[0::2] / 32.0)
        b = np.floor(raw[1::2] / 64.0)
        return (a * 67108864.0 + b) / 9007199254740992.0

    def uniform_array(self, low: float, high: float, n: int) -> np.ndarray:
        return low + (high - low) * self.random_array(n)


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from an arbitrary tuple of printable parts."""
    text = "\x1f".join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.blake2b(text, digest_size=8).digest()
    return struct.unpack("<Q", digest)[0]
