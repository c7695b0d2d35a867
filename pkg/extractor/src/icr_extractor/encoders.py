"""Text and image encoders behind small uniform interfaces.

The pretrained pair matches the reference setup: a SentenceTransformers
encoder for 768-d text vectors and torchvision's resnet101 pooled features
for 2048-d image vectors, preprocessed with the standard normalization but
without resizing or center-cropping. Both raise ModelUnavailable when the
model (or its weights) cannot be loaded, e.g. offline.

The fallback pair is fully deterministic and dependency-light: the hashing
text embedder from the core package and a seeded random projection of the
raster. Fallback encoders mark their stores via the format's version bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from PIL import Image

from icr.stores import IMAGE_DIM, TEXT_DIM, hash_embed


class ModelUnavailable(Exception):
    """A pretrained encoder could not be constructed."""


class TextEncoder(Protocol):
    name: str
    is_fallback: bool

    def encode(self, texts: Sequence[str]) -> np.ndarray: ...


class ImageEncoder(Protocol):
    name: str
    is_fallback: bool

    def encode(self, images: Sequence[Image.Image]) -> np.ndarray: ...


@dataclass
class SentenceTransformerEncoder:
    name: str = "all-mpnet-base-v2"
    is_fallback: bool = False
    batch_size: int = 64

    def __post_init__(self):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelUnavailable(f"sentence-transformers not installed: {exc}") from exc
        try:
            self._model = SentenceTransformer(self.name)
        except Exception as exc:
            raise ModelUnavailable(f"cannot load text model {self.name!r}: {exc}") from exc

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        vectors = self._model.encode(list(texts), batch_size=self.batch_size,
                                     show_progress_bar=False, convert_to_numpy=True)
        out = np.asarray(vectors, dtype=np.float32)
        if out.shape != (len(texts), TEXT_DIM):
            raise ModelUnavailable(f"text model emitted shape {out.shape}, expected (*, {TEXT_DIM})")
        return out


@dataclass
class HashTextEncoder:
    """Deterministic fallback: signed token-feature hashing, unit norm."""

    seed: int = 0
    dim: int = TEXT_DIM
    name: str = "hash"
    is_fallback: bool = True

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([hash_embed(t, self.dim, self.seed) for t in texts]) \
            if texts else np.zeros((0, self.dim), dtype=np.float32)


_IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
_IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)


@dataclass
class ResNetImageEncoder:
    """Pooled 2048-d features from a pretrained residual network.

    Preprocessing normalizes with the ImageNet statistics but keeps the full
    canvas (no resize, no center crop).
    """

    name: str = "resnet101"
    is_fallback: bool = False
    batch_size: int = 16

    def __post_init__(self):
        try:
            import torch
            import torchvision
        except ImportError as exc:
            raise ModelUnavailable(f"torch/torchvision not installed: {exc}") from exc
        self._torch = torch
        try:
            builder = getattr(torchvision.models, self.name)
            model = builder(weights="IMAGENET1K_V1")
        except Exception as exc:
            raise ModelUnavailable(f"cannot load image model {self.name!r}: {exc}") from exc
        model.eval()
        # everything up to (and including) global average pooling
        self._features = torch.nn.Sequential(*list(model.children())[:-1])

    def encode(self, images: Sequence[Image.Image]) -> np.ndarray:
        torch = self._torch
        out = []
        with torch.no_grad():
            for start in range(0, len(images), self.batch_size):
                chunk = images[start:start + self.batch_size]
                arrays = [((np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0)
                           - _IMAGENET_MEAN) / _IMAGENET_STD for img in chunk]
                batch = torch.from_numpy(np.stack(arrays).transpose(0, 3, 1, 2))
                features = self._features(batch).reshape(len(chunk), -1)
                out.append(features.numpy().astype(np.float32))
        result = np.concatenate(out, axis=0) if out else np.zeros((0, IMAGE_DIM), dtype=np.float32)
        if result.shape[1] != IMAGE_DIM:
            raise ModelUnavailable(f"image model emitted dim {result.shape[1]}, expected {IMAGE_DIM}")
        return result


@dataclass
class RandomProjectionImageEncoder:
    """Deterministic fallback: seeded random projection of a downsampled raster."""

    seed: int = 0
    dim: int = IMAGE_DIM
    grid: tuple[int, int] = (50, 40)  # (width, height) of the downsampled raster
    name: str = "random-projection"
    is_fallback: bool = True
    _projection: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        n_in = self.grid[0] * self.grid[1] * 3
        self._projection = rng.standard_normal((n_in, self.dim)).astype(np.float32) / np.sqrt(n_in)

    def encode(self, images: Sequence[Image.Image]) -> np.ndarray:
        if not images:
            return np.zeros((0, self.dim), dtype=np.float32)
        rows = []
        for img in images:
            small = img.convert("RGB").resize(self.grid, Image.NEAREST)
            flat = np.asarray(small, dtype=np.float32).reshape(-1) / 255.0
            vec = flat @ self._projection
            norm = float(np.linalg.norm(vec))
            rows.append(vec / norm if norm else vec)
        return np.stack(rows).astype(np.float32)


TEXT_FALLBACK_NAMES = ("hash", "fallback")
IMAGE_FALLBACK_NAMES = ("random-projection", "fallback")


def make_text_encoder(name: str, seed: int = 0) -> TextEncoder:
    if name in TEXT_FALLBACK_NAMES:
        return HashTextEncoder(seed=seed)
    return SentenceTransformerEncoder(name=name)


def make_image_encoder(name: str, seed: int = 0) -> ImageEncoder:
    if name in IMAGE_FALLBACK_NAMES:
        return RandomProjectionImageEncoder(seed=seed)
    return ResNetImageEncoder(name=name)
