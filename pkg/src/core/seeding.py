"""Seed stream derivation.

One master seed fans out into independent streams (split, init, per-epoch
shuffles, per-segment generation) by hashing the master together with a
stream tag and indices. Adding seeds or epochs never perturbs existing streams.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Tags for independent random streams."""

    SPLIT = 1
    INIT = 2
    EPOCH = 3
    SEGMENT = 4
    ATTEMPT = 5


def derive_seed(master: int, stream: Stream, *indices: int) -> int:
    """Derive a 63-bit sub-seed from a master seed.

    Args:
        master: Master seed.
        stream: Stream tag.
        *indices: Further non-negative integers (epoch, segment index, ...).

    Returns:
        int: Sub-seed, stable across platforms and numpy versions.
    """
    entropy = [int(master) & 0xFFFFFFFFFFFFFFFF, int(stream), *map(int, indices)]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def rng_for(master: int, stream: Stream, *indices: int) -> np.random.Generator:
    """Build a generator seeded from a derived sub-seed.

    Args:
        master: Master seed.
        stream: Stream tag.
        *indices: Further indices.

    Returns:
        np.random.Generator: PCG64 generator.
    """
    return np.random.default_rng(derive_seed(master, stream, *indices))
