"""Reproducible random substreams.

Every random draw in the package comes from a Philox (counter-based) generator
keyed by a master seed plus a tuple of integers naming the substream, e.g.
``("perturb.delete", trial)``. Two substreams with different keys are
statistically independent, and the same key always replays the same stream,
no matter how many other streams were consumed first or in which order.
"""
from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def tag_id(tag: str) -> int:
    """Stable 32-bit id for a substream tag."""
    return zlib.crc32(tag.encode("utf-8"))


def substream(seed: int, tag: str, *ids: int) -> np.random.Generator:
    """Generator for substream ``(tag, *ids)`` under master ``seed``."""
    key = [tag_id(tag)] + [int(i) for i in ids]
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, tag: str, *ids: int) -> int:
    """A 64-bit child seed, for handing a substream down to another function."""
    key = [tag_id(tag)] + [int(i) for i in ids]
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
