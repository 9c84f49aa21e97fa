"""Portable seeded random stream.

All stochastic code in the package draws from :class:`SplitMix64` so that a
seed pins every output bit-for-bit on any platform and in any language that
implements the same three steps:

    state  <- state + 0x9E3779B97F4A7C15            (mod 2**64)
    z      <- (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB
    output <- z ^ (z >> 31)

Uniforms in [0, 1) take the top 53 bits: ``(u64 >> 11) * 2**-53``.
Standard normals use the cosine branch of Box-Muller on two consecutive
uniforms ``u1, u2``: ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.

Reference outputs (seed 0): 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4,
0x06C45D188009454F.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_POW_M53 = 1.0 / (1 << 53)


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 stream with scalar and vectorised draws.

    Scalar and block draws advance the same state, so
    ``s.uniforms(3)`` equals ``[s.uniform() for _ in range(3)]`` on a twin.
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return _mix(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _TWO_POW_M53

    def u64s(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.zeros(0, dtype=np.uint64)
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self.state) + steps * np.uint64(GAMMA)
        self.state = (self.state + n * GAMMA) & MASK64
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))

    def uniforms(self, n: int) -> np.ndarray:
        return (self.u64s(n) >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53

    def normals(self, n: int) -> np.ndarray:
        u = self.uniforms(2 * n).reshape(n, 2)
        return np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])

    def spawn(self) -> "SplitMix64":
        """Child stream seeded from the next output of this one."""
        return SplitMix64(self.next_u64())


def permutation(n: int, stream: SplitMix64) -> np.ndarray:
    """Fisher-Yates shuffle of ``range(n)`` driven by ``stream``.

    Index choice is ``next_u64() % (i + 1)``; the modulo bias is below 2**-50
    for any realistic n and keeps the procedure trivially portable.
    """
    out = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = stream.next_u64() % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out
