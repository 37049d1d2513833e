"""Seed derivation for reproducible replicate fan-out.

Replicate streams are derived from a 64-bit master seed with SplitMix64:
the seed of replicate ``i`` is the ``i``-th output of the SplitMix64
sequence started at the master seed.  Each replicate then owns an
independent PCG64 generator, so results are bit-identical for a given
(master seed, replicate index) no matter how replicates are scheduled.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer (Steele-Lea-Flood), a 64-bit mixing permutation."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def replicate_seed(master_seed: int, index: int) -> int:
    """Seed of replicate ``index``: the index-th output of SplitMix64(master)."""
    index = int(index)  # numpy ints would overflow below
    if index < 0:
        raise ValueError("replicate index must be >= 0")
    return splitmix64((int(master_seed) + (index + 1) * _GAMMA) & _MASK64)


def generator_for(master_seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 generator for one replicate."""
    return np.random.Generator(np.random.PCG64(replicate_seed(master_seed, index)))
