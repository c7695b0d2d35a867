"""Deterministic rasterization of clipart scenes.

Cliparts are painted back to front (largest depth first, ties by object key)
onto a fixed-size canvas with per-depth scale factors; horizontal flips
mirror the sprite. With an assets directory the official art is used; without
one, each clipart type gets a deterministic colored glyph so identical scenes
always produce byte-identical rasters.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, ImageDraw

from icr.scene import PERSON_TYPE_IDS, Clipart, Scene


class MissingAsset(Exception):
    """Official art requested but some clipart assets are absent."""

    def __init__(self, names):
        self.names = tuple(sorted(set(names)))
        super().__init__(f"missing clipart asset(s): {', '.join(self.names)}")


@dataclass(frozen=True)
class CanvasGeometry:
    width: int = 500
    height: int = 400
    depth_scales: tuple[float, float, float] = (1.0, 0.7, 0.49)
    base_size: int = 64  # sprite edge at depth 0

    def as_dict(self) -> dict:
        return {"width": self.width, "height": self.height,
                "depth_scales": list(self.depth_scales), "base_size": self.base_size}


DEFAULT_GEOMETRY = CanvasGeometry()

_SKY = (167, 211, 238)
_GRASS = (110, 178, 92)
_HORIZON_FRACTION = 0.55

_GLYPH_SHAPES = ("ellipse", "rectangle", "triangle", "diamond")


def _type_color(type_id: int) -> tuple[int, int, int]:
    digest = hashlib.sha256(f"clipart-color:{type_id}".encode()).digest()
    # keep colors away from the background palette extremes
    return tuple(40 + b % 180 for b in digest[:3])


def _paste_sprite(canvas: Image.Image, sprite: Image.Image, clipart: Clipart,
                  geometry: CanvasGeometry) -> None:
    scale = geometry.depth_scales[clipart.depth]
    size = max(2, int(round(geometry.base_size * scale)))
    sprite = sprite.resize((size, size), Image.NEAREST)
    if clipart.flip:
        sprite = sprite.transpose(Image.FLIP_LEFT_RIGHT)
    left = int(round(clipart.x)) - size // 2
    top = int(round(clipart.y)) - size // 2
    canvas.paste(sprite, (left, top), sprite)


def _glyph_sprite(clipart: Clipart, geometry: CanvasGeometry) -> Image.Image:
    edge = geometry.base_size
    sprite = Image.new("RGBA", (edge, edge), (0, 0, 0, 0))
    draw = ImageDraw.Draw(sprite)
    color = _type_color(clipart.type_id) + (255,)
    shape = _GLYPH_SHAPES[clipart.type_id % len(_GLYPH_SHAPES)]
    box = (4, 4, edge - 5, edge - 5)
    mid = edge // 2
    if shape == "ellipse":
        draw.ellipse(box, fill=color)
    elif shape == "rectangle":
        draw.rectangle(box, fill=color)
    elif shape == "triangle":
        draw.polygon([(mid, 4), (edge - 5, edge - 5), (4, edge - 5)], fill=color)
    else:
        draw.polygon([(mid, 4), (edge - 5, mid), (mid, edge - 5), (4, mid)], fill=color)
    # an off-center notch makes horizontal flips visible in the raster
    draw.rectangle((edge - 14, mid - 4, edge - 8, mid + 4), fill=(20, 20, 20, 255))
    if clipart.type_id in PERSON_TYPE_IDS and clipart.variant is not None:
        expression, pose = clipart.variant
        # variant marks: expression dot row and pose dot column
        draw.ellipse((6 + 8 * expression, 6, 12 + 8 * expression, 12), fill=(255, 255, 255, 255))
        draw.ellipse((6, 6 + 8 * pose, 12, 12 + 8 * pose), fill=(10, 10, 10, 255))
    return sprite


def _asset_sprite(clipart: Clipart, assets_dir: Path) -> Image.Image | None:
    path = assets_dir / f"{clipart.name}.png"
    if not path.exists():
        return None
    return Image.open(path).convert("RGBA")


def render_scene(scene: Scene, geometry: CanvasGeometry = DEFAULT_GEOMETRY,
                 assets_dir: str | Path | None = None) -> Image.Image:
    """Raster of the scene on the default background.

    Raises MissingAsset when assets_dir is given but art is missing; with no
    assets_dir every type falls back to its deterministic glyph.
    """
    canvas = Image.new("RGB", (geometry.width, geometry.height), _SKY)
    draw = ImageDraw.Draw(canvas)
    horizon = int(geometry.height * _HORIZON_FRACTION)
    draw.rectangle((0, horizon, geometry.width, geometry.height), fill=_GRASS)

    if assets_dir is not None:
        assets_dir = Path(assets_dir)
        missing = [c.name for c in scene.cliparts if not (assets_dir / f"{c.name}.png").exists()]
        if missing:
            raise MissingAsset(missing)

    ordered = sorted(scene.cliparts, key=lambda c: (-c.depth, c.object_key))
    for clipart in ordered:
        if assets_dir is not None:
            sprite = _asset_sprite(clipart, assets_dir)
        else:
            sprite = _glyph_sprite(clipart, geometry)
        _paste_sprite(canvas, sprite, clipart, geometry)
    return canvas


def raster_bytes(image: Image.Image) -> bytes:
    """Raw RGB bytes; identical scenes yield identical byte strings."""
    return image.tobytes()
