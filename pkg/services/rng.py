"""
Named, versioned random streams.

Every random draw in the toolkit comes from one 64-bit master seed. A stream
is keyed by (purpose, index), so batch i of a Monte Carlo run sees the same
numbers no matter which worker thread executes it.
"""
import zlib
from typing import Sequence, Union

import numpy as np

PRNG_NAME = "philox4x64"
PRNG_VERSION = "v1"
PRNG_ID = f"{PRNG_NAME}/{PRNG_VERSION}"

SEED_MASK = (1 << 64) - 1


def _purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, purpose: str, *index: int) -> np.random.Generator:
    """
    Build an independent generator for one unit of work

    Args:
        seed: master seed (reduced mod 2^64)
        purpose: short label, e.g. "measure.sample"
        index: batch / restart / chain indices

    Returns:
        numpy Generator backed by a Philox bit generator
    """
    key: Sequence[int] = (_purpose_key(purpose),) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def as_seed(value: Union[int, str, None]) -> int:
    if value is None:
        return 0
    return int(value) & SEED_MASK
