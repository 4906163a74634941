"""Seed plumbing.

Every random draw in the package goes through :func:`substream`, which maps a
base seed plus an integer key path onto an independent ``numpy`` generator via
``SeedSequence`` spawn keys. Results therefore depend only on the key path and
never on execution order or worker count.
"""

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *keys: int) -> int:
    """Collapse a key path into a fresh 63-bit integer seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
