"""Platform-stable seeded random number generation.

All sampling in this package flows through :class:`Xoshiro256StarStar`, a pure
Python implementation of the xoshiro256** generator with splitmix64 state
initialization. The implementation uses only 64-bit integer arithmetic, so
streams are bit-identical across platforms and Python builds, which a library
RNG (whose algorithm may change between releases) cannot guarantee.

Independent streams are derived from one top-level seed with
:func:`derive_seed`, which hashes ``"{seed}|{label}"`` with SHA-256 and takes
the first 8 bytes. Every consumer documents its label, so a run is fully
reproducible from its single configured seed.
"""

from __future__ import annotations

import hashlib
import math

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, label: str) -> int:
    """Derive the seed of a named substream from a top-level seed."""
    digest = hashlib.sha256(f"{seed}|{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** generator, state seeded through splitmix64."""

    def __init__(self, seed: int) -> None:
        sm = seed & _MASK64
        state = []
        for _ in range(4):
            sm, word = _splitmix64(sm)
            state.append(word)
        self._s = state
        self._gauss: float | None = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def sample(self, population: list, k: int) -> list:
        """Uniform sample of k items without replacement (partial Fisher-Yates).

        The result depends on the order of ``population``; callers pass sorted
        sequences so samples are independent of upstream set iteration order.
        """
        if k > len(population):
            raise ValueError("sample larger than population")
        pool = list(population)
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, population: list):
        if not population:
            raise ValueError("empty population")
        return population[self.randbelow(len(population))]

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Gaussian deviate via the Marsaglia polar method."""
        if self._gauss is not None:
            z = self._gauss
            self._gauss = None
            return mu + sigma * z
        while True:
            u = 2.0 * self.random() - 1.0
            v = 2.0 * self.random() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = math.sqrt(-2.0 * math.log(s) / s)
        self._gauss = v * f
        return mu + sigma * u * f

    def poisson(self, lam: float) -> int:
        """Poisson deviate via Knuth's multiplicative method (small means)."""
        if lam < 0:
            raise ValueError("lam must be non-negative")
        if lam == 0:
            return 0
        threshold = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            k += 1
            p *= self.random()
            if p <= threshold:
                return k - 1
