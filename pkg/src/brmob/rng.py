"""Deterministic random-stream derivation.

Every stochastic operation in the package owns a private stream derived
from a 64-bit master seed and a tuple of string/int labels.  The stream
key is the first 16 bytes of ``sha256(repr((master, *labels)))`` fed to
the counter-based Philox generator, so concurrent consumers with distinct
labels never share state and reruns are bit-reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_key(master_seed: int, *labels: object) -> int:
    """Hash a master seed and labels into a 128-bit Philox key."""
    payload = repr((int(master_seed),) + tuple(labels)).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:16], "little")


def make_generator(master_seed: int, *labels: object) -> np.random.Generator:
    """Return a Philox-backed generator for the (seed, labels) stream."""
    return np.random.Generator(np.random.Philox(key=derive_key(master_seed, *labels)))
