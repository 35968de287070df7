"""
Replicate stream derivation.

Replicate i of a run seeded with s draws from a Philox generator keyed by
splitmix64(s XOR i*0x9E3779B97F4A7C15). Keys depend only on (seed, index),
so results do not depend on how replicates are spread over workers.
"""

import hashlib

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, index: int) -> int:
    return splitmix64((seed ^ (index * GOLDEN_GAMMA)) & _MASK64)


def stream(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(seed, index)))


def label_seed(seed: int, label: str) -> int:
    """Seed for a named sub-task, so suite tests do not share streams."""
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def fresh_seed() -> int:
    # --reseed: OS entropy through SeedSequence
    return int(np.random.SeedSequence().entropy) & _MASK64
