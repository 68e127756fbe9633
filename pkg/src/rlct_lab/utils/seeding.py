"""Counter-based random streams keyed by (seed, stream ids)."""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1

# Stream ids within one cell seed.
DATA_STREAM = 0
CHAIN_STREAM = 1
TEMPERED_STREAM = 2
INIT_STREAM = 3


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a Philox generator for ``seed`` and an optional stream path."""

    entropy = [int(seed) & MASK64, *(int(s) & MASK64 for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def cell_seed(seed: int, n: int, replication: int) -> int:
    """Seed of one grid cell: seed XOR a stable 64-bit hash of (n, replication)."""

    digest = hashlib.blake2b(f"{n}:{replication}".encode("ascii"), digest_size=8).digest()
    return (int(seed) ^ int.from_bytes(digest, "big")) & MASK64
