"""Named derived seeds so one master seed drives every stage reproducibly."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, name: str) -> int:
    """Stable 32-bit seed for a named stage, derived from the master seed.

    Uses sha256 so the derivation is identical across platforms and Python
    processes (unlike the builtin hash).
    """
    digest = hashlib.sha256(f"{master}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def rng_for(master: int, name: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, name))
