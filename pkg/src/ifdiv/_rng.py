"""Counter-based pseudo-random numbers (splitmix64 finalizer).

Every draw is addressed by an absolute counter position, so a stream can be
sampled in any order and from any number of workers with identical results.
Episode seeds and the per-slot noise layout are documented in the README;
changing either silently breaks reproducibility of recorded runs.
"""

from __future__ import annotations

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def uniform_at(seed: int, counter: int) -> float:
    """Uniform draw in [0, 1) at an absolute counter position of a stream."""
    z = mix64((seed + counter * _GOLDEN) & _MASK)
    return (z >> 11) * (1.0 / 9007199254740992.0)


def episode_seed(base_seed: int, index: int) -> int:
    """Derived seed for episode `index` of a batch started at `base_seed`."""
    return mix64((base_seed + (index + 1) * _GOLDEN) & _MASK)
