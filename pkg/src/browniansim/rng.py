"""Seedable counter-based random number generation.

All stochastic code in this package draws from SplitMix64 streams.  The
compiled kernel implements the identical update in C, so simulation results
are bit-for-bit reproducible across backends.  Independent trials derive
their streams from (master seed, trial index) via `derive_stream`.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """Finalization hash of SplitMix64."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_stream(master_seed: int, index: int) -> int:
    """Initial SplitMix64 state for trial `index` under `master_seed`."""
    return mix64((master_seed & MASK64) ^ mix64(((index + 1) * GOLDEN) & MASK64))


class SplitMix64:
    """Reference SplitMix64 stream; state advances by the golden gamma."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        """Uniform double in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def exponential(self) -> float:
        return -math.log(self.uniform())

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) via the 64-bit multiply-shift method."""
        return (self.next_u64() * n) >> 64
