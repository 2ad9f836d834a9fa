"""Seeded pseudo-random streams shared by subsampling, holdout splits and simulation.

All randomness in the package comes from SplitMix64 (Steele, Lea & Flood 2014):

    state <- state + 0x9E3779B97F4A7C15          (mod 2**64)
    z     <- state
    z     <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2**64)
    z     <- (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2**64)
    out   <- z ^ (z >> 31)

The initial state is the user seed reduced modulo 2**64. Because the state
advances by a constant, the k-th output (k = 1, 2, ...) is a pure function of
``seed + k * GAMMA``, which lets blocks of draws be produced with numpy.

Derived draws:

* uniform double in [0, 1): ``(out >> 11) * 2**-53``
* integer in [0, m): ``out % m`` (bias below m / 2**64, ignored)
* standard normal: Box-Muller on two consecutive uniforms u1, u2 as
  ``sqrt(-2 log(1 - u1)) * cos(2 pi u2)``; the sine partner is discarded.
"""
from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

_GAMMA = np.uint64(GAMMA)
_MIX1 = np.uint64(MIX1)
_MIX2 = np.uint64(MIX2)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Counter-style SplitMix64 stream.

    >>> rng = SplitMix64(0)
    >>> hex(int(rng.next_u64(1)[0]))
    '0xe220a8397b1dcdaf'
    """

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self, n: int) -> np.ndarray:
        """Return the next ``n`` raw 64-bit outputs and advance the state."""
        if n < 0:
            raise ValueError("n must be non-negative")
        k = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self.state) + k * _GAMMA
            out = _mix(states)
        self.state = (self.state + n * GAMMA) & MASK64
        return out

    def random(self, n: int) -> np.ndarray:
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def below(self, bounds) -> np.ndarray:
        """One integer in ``[0, b)`` for each entry ``b`` of ``bounds``."""
        bounds = np.asarray(bounds, dtype=np.uint64)
        if bounds.size and bounds.min() == 0:
            raise ValueError("bounds must be positive")
        return (self.next_u64(bounds.size) % bounds).astype(np.int64)

    def normal(self, n: int, mean: float = 0.0, sd: float = 1.0) -> np.ndarray:
        u = self.random(2 * n).reshape(n, 2) if n else np.zeros((0, 2))
        z = np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])
        return mean + sd * z


def partial_shuffle(population: int, n: int, seed: int) -> np.ndarray:
    """Select ``n`` distinct indices from ``range(population)``.

    Runs the first ``n`` steps of a forward Fisher-Yates shuffle: for
    ``i = 0 .. n-1`` swap position ``i`` with ``i + (out_i % (population - i))``.
    Returns the first ``n`` positions, in draw order.
    """
    if not 0 <= n <= population:
        raise ValueError(f"cannot draw {n} items from {population}")
    rng = SplitMix64(seed)
    offsets = rng.below(population - np.arange(n)).tolist()
    slots: dict[int, int] = {}
    picked = []
    for i, off in enumerate(offsets):
        j = i + off
        vi = slots.get(i, i)
        vj = slots.get(j, j)
        slots[j] = vi
        picked.append(vj)
    return np.asarray(picked, dtype=np.int64)
