"""Counter-based random streams for the simulation.

Every draw is a pure function of (seed, entity id, step, purpose tag), so
replays and parallel sweeps are order-independent and bit-reproducible.
The mixer is the splitmix64 finalizer applied to the running combination of
the key words.  The numba kernel re-implements the identical arithmetic; a
test pins the two implementations against each other.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # splitmix64 stream increment

TAG_SLOWDOWN = 1
TAG_COIN = 2
TAG_INJECT = 3
TAG_CLASS_TV = 4
TAG_CLASS_HIGH = 5


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def hash_u64(seed: int, a: int, b: int, tag: int) -> int:
    """64-bit hash of the stream key (seed, a, b, tag)."""
    h = _mix64((seed + _GAMMA) & _MASK)
    h = _mix64((h + a + _GAMMA) & _MASK)
    h = _mix64((h + b + _GAMMA) & _MASK)
    h = _mix64((h + tag + _GAMMA) & _MASK)
    return h


def uniform01(seed: int, a: int, b: int, tag: int) -> float:
    """Uniform draw in [0, 1) for the stream key (seed, a, b, tag)."""
    return (hash_u64(seed, a, b, tag) >> 11) * 2.0 ** -53


def placement_rng(seed: int) -> np.random.Generator:
    """Generator for one-off setup draws (initial placement, class shuffle)."""
    return np.random.Generator(np.random.Philox(key=seed))


class KeyedCoin:
    """Adapter exposing one keyed draw through a .random() method."""

    def __init__(self, seed: int, a: int, b: int, tag: int = TAG_COIN):
        self._key = (seed, a, b, tag)

    def random(self) -> float:
        return uniform01(*self._key)
