"""Named random streams derived from a single 64-bit seed.

Each consumer asks for its own stream by name, so adding a new consumer
never shifts the draws seen by existing ones.
"""
import hashlib

import numpy as np


def _name_key(name):
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed, name):
    """Return a ``numpy.random.Generator`` for ``(seed, name)``."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng(np.random.SeedSequence([seed, _name_key(name)]))
