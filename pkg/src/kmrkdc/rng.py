"""Counter-based random streams.

Every stream is addressed by ``(seed, index)``: its state is a pure
function of the pair, so stream ``b`` can be produced by any worker in any
order. The generator is SplitMix64; the per-index starting state is the
SplitMix64 finalizer applied to the seed hash plus ``(index + 1)`` golden
increments.

This module is the plain-Python definition. :mod:`kmrkdc._engine`
carries a compiled copy used in the permutation hot loop; the test suite
checks that both produce identical permutations.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# domain tags keep permutation streams and replicate seeds apart
PERMUTATION_DOMAIN = 0x5045524D55544531
REPLICATE_DOMAIN = 0x5245504C49434154
MAF_DOMAIN = 0x4D414644524157


def mix64(z: int) -> int:
    """SplitMix64 finalizer (a bijection on 64-bit integers)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream_start(seed: int, index: int, domain: int = PERMUTATION_DOMAIN) -> int:
    key = mix64(check_seed(seed) ^ domain)
    return mix64((key + (index + 1) * GOLDEN) & MASK64)


class CounterStream:
    """SplitMix64 stream for one ``(seed, index)`` address."""

    def __init__(self, seed: int, index: int, domain: int = PERMUTATION_DOMAIN):
        self.state = stream_start(seed, index, domain)

    def next64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` for ``1 <= m < 2**32`` (Lemire, unbiased)."""
        prod = (self.next64() >> 32) * m
        low = prod & 0xFFFFFFFF
        if low < m:
            threshold = ((1 << 32) - m) % m
            while low < threshold:
                prod = (self.next64() >> 32) * m
                low = prod & 0xFFFFFFFF
        return prod >> 32


def permutation(seed: int, index: int, n: int) -> list[int]:
    """Fisher-Yates shuffle of ``range(n)`` driven by stream ``(seed, index)``."""
    stream = CounterStream(seed, index)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = stream.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def replicate_seed(seed: int, replicate: int) -> int:
    """Seed for replicate ``replicate`` of a study seeded with ``seed``."""
    return stream_start(seed, replicate, REPLICATE_DOMAIN)
