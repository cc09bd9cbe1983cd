"""Deterministic, splittable random streams.

Every random quantity in the package is a pure function of an integer
seed plus a tuple "path" addressing its position in the work tree
(replicate index, grid index, block index, ...). Streams are Philox
counter-based generators keyed through ``numpy.random.SeedSequence``, so
work can be partitioned across processes in any order without changing a
single draw.

Gaussian vectors are generated in fixed-size blocks: block ``k`` of a
draw is keyed by ``(*path, k)``, which makes element ``b`` depend only on
the seed, the path and ``b`` itself, independent of how many elements are
requested by which worker.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 1 << 16
_MASK = (1 << 128) - 1


def stream(seed: int, *path: int) -> np.random.Generator:
    """A fresh generator for the stream addressed by ``(seed, *path)``."""
    ss = np.random.SeedSequence(seed & _MASK, spawn_key=tuple(int(k) for k in path))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed: int, *path: int) -> int:
    """Derive a 128-bit integer seed for an independent sub-tree of work."""
    ss = np.random.SeedSequence(seed & _MASK, spawn_key=tuple(int(k) for k in path))
    return int.from_bytes(ss.generate_state(4).tobytes(), "little")


def normal_draws(seed: int, path: tuple[int, ...], count: int, scale: float = 1.0) -> np.ndarray:
    """``count`` N(0, scale^2) draws, reproducible block by block."""
    out = np.empty(count)
    for k in range((count + _BLOCK - 1) // _BLOCK):
        lo = k * _BLOCK
        hi = min(count, lo + _BLOCK)
        out[lo:hi] = stream(seed, *path, k).standard_normal(hi - lo)
    if scale != 1.0:
        out *= scale
    return out
