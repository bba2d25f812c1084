"""Deterministic, named RNG streams.

Every stochastic component draws from a stream keyed by (global_seed,
entity...). Keys are hashed with blake2b, never with Python's randomized
hash(), so runs reproduce across processes and platforms.
"""

import hashlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        data = b"i" + int(key).to_bytes(16, "little", signed=True)
    else:
        data = b"s" + str(key).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def stream(*keys) -> np.random.Generator:
    """A PCG64 generator deterministically derived from the key tuple."""
    entropy = [_key_to_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(*keys) -> int:
    """A stable 63-bit integer seed derived from the key tuple."""
    h = hashlib.blake2b(digest_size=8)
    for k in keys:
        if isinstance(k, (int, np.integer)):
            h.update(b"i" + int(k).to_bytes(16, "little", signed=True))
        else:
            h.update(b"s" + str(k).encode("utf-8"))
    return int.from_bytes(h.digest(), "little") >> 1
