"""Bit-exact persistence of keyed float32 vectors, plus a hashing fallback embedder.

File format (little-endian): magic "ICRE", u32 version, u32 dim, u64 record
count, then per record a u16 key byte-length, the UTF-8 key bytes, and dim
float32 values. The version word's high bit marks stores produced by the
fallback embedder rather than a pretrained encoder.

Keys follow "<dialogue_id>/<round>/<field>" with field in {ctx, msg, img};
the round component is an integer, or the literal "src" for source-scene
image vectors.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BadMagic, DimMismatch, TruncatedFile, VersionMismatch

MAGIC = b"ICRE"
FORMAT_VERSION = 1
FALLBACK_BIT = 1 << 31

TEXT_DIM = 768
IMAGE_DIM = 2048


@dataclass
class EmbeddingStore:
    """In-memory store of float32 vectors, all of one dimensionality."""

    dim: int
    fallback: bool = False
    records: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, key: str, vector: np.ndarray) -> None:
        if key in self.records:
            raise ValueError(f"duplicate key {key!r}")
        vector = np.asarray(vector, dtype=np.float32)
        if vector.shape != (self.dim,):
            raise DimMismatch(f"vector for {key!r} has shape {vector.shape}, expected ({self.dim},)")
        self.records[key] = vector

    def __contains__(self, key: str) -> bool:
        return key in self.records

    def __getitem__(self, key: str) -> np.ndarray:
        return self.records[key]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def version(self) -> int:
        return FORMAT_VERSION | (FALLBACK_BIT if self.fallback else 0)


def write_store(store: EmbeddingStore, path: str | Path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIQ", store.version, store.dim, len(store.records)))
        for key, vector in store.records.items():
            key_bytes = key.encode("utf-8")
            if len(key_bytes) > 0xFFFF:
                raise ValueError(f"key too long: {key!r}")
            fh.write(struct.pack("<H", len(key_bytes)))
            fh.write(key_bytes)
            fh.write(np.ascontiguousarray(vector, dtype="<f4").tobytes())


def read_store(path: str | Path, expect_dim: int | None = None) -> EmbeddingStore:
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"{path}: not an embedding store (magic {data[:4]!r})")
    if len(data) < 20:
        raise TruncatedFile(f"{path}: header incomplete")
    raw_version, dim, count = struct.unpack_from("<IIQ", data, 4)
    if raw_version & ~FALLBACK_BIT != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: version {raw_version & ~FALLBACK_BIT}, expected {FORMAT_VERSION}")
    if expect_dim is not None and dim != expect_dim:
        raise DimMismatch(f"{path}: store dim {dim}, expected {expect_dim}")
    store = EmbeddingStore(dim=dim, fallback=bool(raw_version & FALLBACK_BIT))
    offset = 20
    vec_bytes = dim * 4
    for _ in range(count):
        if offset + 2 > len(data):
            raise TruncatedFile(f"{path}: record header past end of file at byte {offset}")
        (key_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + key_len + vec_bytes > len(data):
            raise TruncatedFile(f"{path}: record payload past end of file at byte {offset}")
        key = data[offset:offset + key_len].decode("utf-8")
        offset += key_len
        vector = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += vec_bytes
        if key in store.records:
            raise ValueError(f"{path}: duplicate key {key!r}")
        store.records[key] = vector
    if offset != len(data):
        raise TruncatedFile(f"{path}: {len(data) - offset} trailing byte(s) after {count} records")
    return store


def missing_keys(store: EmbeddingStore, keys: Iterable[str]) -> list[str]:
    """Keys absent from the store, sorted. Empty list means full coverage."""
    return sorted(k for k in set(keys) if k not in store.records)


def hash_embed(text: str | Sequence[str], dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit-norm embedding via signed token-feature hashing.

    Hashes token unigrams and adjacent bigrams into signed buckets, so the
    output depends on token order. Purely a fallback: no semantic claim.
    """
    if dim <= 0:
        raise ValueError("dim must be positive")
    tokens = text.split() if isinstance(text, str) else list(text)
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    features: list[bytes] = [b"1:" + t.encode("utf-8") for t in tokens]
    features.extend(b"2:" + a.encode("utf-8") + b"\x00" + b.encode("utf-8")
                    for a, b in zip(tokens, tokens[1:]))
    if not features:
        features = [b"0:"]  # sentinel so the empty text still maps to a unit vector
    acc = np.zeros(dim, dtype=np.float64)
    for feature in features:
        digest = hashlib.blake2b(feature, digest_size=8, key=key).digest()
        h = int.from_bytes(digest, "little")
        bucket = (h >> 1) % dim
        acc[bucket] += 1.0 if h & 1 else -1.0
    norm = np.linalg.norm(acc)
    if norm == 0.0:  # cancellation across repeated features; fall back to a basis vector
        acc[0] = 1.0
        norm = 1.0
    return (acc / norm).astype(np.float32)
