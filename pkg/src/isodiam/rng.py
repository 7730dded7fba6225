"""Counter-based random streams.

Every stochastic routine takes an integer seed and derives independent
substreams by spawn-key path, so results are reproducible bit for bit and
independent of any worker count or evaluation order.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for the (seed, path) coordinate; same inputs, same stream."""
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
