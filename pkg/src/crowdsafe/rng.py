"""Portable seeded generator (SplitMix64).

The state-update rule is fixed so that any language can reproduce the
same draws bit for bit:

    state  <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z      <- state
    z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    output <- z ^ (z >> 31)

Derived draws:

* ``uniform()``: ``(next_u64() >> 11) * 2**-53``, in [0, 1).
* ``below(n)``: debiased modulo; draws below ``2**64 mod n`` are
  rejected, then ``r % n``.
* ``sample_indices(n, k)``: partial Fisher-Yates over ``range(n)``;
  step ``i`` swaps position ``i`` with ``i + below(n - i)``.
* ``gauss_pair()``: Box-Muller, ``u1 = 1 - uniform()``, ``u2 = uniform()``,
  returns ``(r cos(2 pi u2), r sin(2 pi u2))`` with ``r = sqrt(-2 ln u1)``.
"""

import math

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed=0):
        if seed < 0:
            raise ValueError("seed must be unsigned")
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n):
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) % n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n

    def sample_indices(self, n, k):
        """``k`` distinct indices from ``range(n)``, in draw order."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def gauss_pair(self):
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        return r * math.cos(theta), r * math.sin(theta)
