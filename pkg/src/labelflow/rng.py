"""Single deterministic random source for the whole system.

All randomness flows through PCG64 generators derived here, so any run
is reproducible from one integer seed. Node-level seeds are derived by
folding stable string keys into the root seed.
"""
from __future__ import annotations

import zlib

import numpy as np


def make_generator(*entropy: int) -> np.random.Generator:
    """A PCG64 generator seeded from one or more integers."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(entropy))))


def fold_key(seed: int, key: str) -> int:
    """Derive a child seed from a root seed and a stable string key."""
    words = np.random.SeedSequence([seed, zlib.crc32(key.encode("utf-8"))]).generate_state(2)
    return int(words[0]) << 32 | int(words[1])
