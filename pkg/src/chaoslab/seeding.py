"""Deterministic seed derivation for trial-parallel experiments.

Every random quantity in the library draws from a ``numpy.random.Generator``
whose seed is derived from a 64-bit master seed and a sequence of role tags
(strings or integers).  The mix function is BLAKE2b over the canonical byte
encoding of ``(master, *tags)``, truncated to 64 bits.  The derivation is

    child = blake2b(master_le64 || b"/" || tag_1 || b"/" || ... , digest=8)

interpreted little-endian.  This makes child streams independent of worker
scheduling: a trial's stream depends only on ``(master_seed, tags)``.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["child_seed", "make_rng"]


def child_seed(master_seed: int, *tags: str | int) -> int:
    """Derive a 64-bit child seed from a master seed and role tags."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master_seed).to_bytes(8, "little", signed=False))
    for tag in tags:
        h.update(b"/")
        if isinstance(tag, (int, np.integer)):
            h.update(b"i" + int(tag).to_bytes(8, "little", signed=True))
        else:
            h.update(b"s" + str(tag).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int, *tags: str | int) -> np.random.Generator:
    """Generator seeded by ``child_seed(seed, *tags)`` (PCG64)."""
    if tags:
        seed = child_seed(seed, *tags)
    return np.random.default_rng(int(seed) & (2**64 - 1))
