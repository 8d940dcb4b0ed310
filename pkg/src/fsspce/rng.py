"""Seeded random streams.

Every stream is a Philox counter-based generator. Within one experiment run,
independent streams are obtained as ``Philox(seed + stream_index)``; per-run
seeds are derived from a base seed with :func:`mix64` so that runs can be
executed in any order (or concurrently) with identical results.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(base_seed, index):
    """SplitMix64 finalizer applied to ``base_seed + (index + 1) * golden``."""
    z = (int(base_seed) + (int(index) + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def make_rng(seed, stream=0):
    """Return a Philox-backed generator for ``seed + stream``."""
    return np.random.Generator(np.random.Philox(int(seed) + int(stream)))


def as_rng(rng):
    """Accept a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)
