"""Deterministic seed derivation for nested RNG streams."""

import zlib

import numpy as np


def derive(seed: int, *tags) -> int:
    """Stable child seed from a base seed and a tag path (ints or strings)."""
    entropy = [int(seed) & 0xFFFFFFFF]
    for t in tags:
        if isinstance(t, (int, np.integer)):
            entropy.append(int(t) & 0xFFFFFFFF)
        else:
            entropy.append(zlib.crc32(str(t).encode()))
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
