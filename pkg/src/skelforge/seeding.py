"""Deterministic sub-seeds and generators.

Every stochastic stage draws from numpy's PCG64 seeded with a 64-bit value
derived from the run seed and a tuple of keys, so results are reproducible
across platforms and independent of execution order.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(seed: int, *keys) -> int:
    payload = json.dumps([int(seed) & SEED_MASK, *[str(k) for k in keys]]).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def make_rng(seed: int, *keys) -> np.random.Generator:
    s = derive_seed(seed, *keys) if keys else int(seed) & SEED_MASK
    return np.random.Generator(np.random.PCG64(s))
