"""Deterministic seed derivation."""

import hashlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator]

_MASK_64 = (1 << 64) - 1


def derive_seed(base_seed: int, *keys: object) -> int:
    """Stable 63-bit seed for (base_seed, *keys), identical in every process."""
    material = ":".join([str(int(base_seed))] + [str(k) for k in keys])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def make_rng(seed: SeedLike) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed; generators pass through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed) & _MASK_64)
