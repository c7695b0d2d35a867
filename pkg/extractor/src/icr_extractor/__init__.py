"""Embedding extraction for instruction-following dialogue games.

Renders clipart scenes deterministically, encodes contexts and messages with
a sentence encoder (768-d) and scenes with a CNN (2048-d), and writes the
shared bit-exact store format consumed by the core `icr` package. Offline
fallback encoders keep the whole pipeline runnable without pretrained
weights.
"""

from .encoders import (
    HashTextEncoder,
    ModelUnavailable,
    RandomProjectionImageEncoder,
    ResNetImageEncoder,
    SentenceTransformerEncoder,
    make_image_encoder,
    make_text_encoder,
)
from .extract import ExtractionResult, extract_image, extract_text, peek_probe, run_extraction
from .render import CanvasGeometry, MissingAsset, render_scene, raster_bytes

__version__ = "0.1.0"
