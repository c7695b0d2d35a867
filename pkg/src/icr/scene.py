"""Clipart scenes: parsing, serialization, action diffing, and similarity.

A scene is a set of placed cliparts. The default scene-string grammar is a
comma-separated record format: a leading clipart count, then per clipart the
fields (art-asset name, local index, type id, x, y, depth, flip). The grammar
object is configurable so a differently ordered upstream format can be bound
without code changes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Sequence

from .errors import EmptySourceScene, MalformedSceneString

CLIPART_TYPE_NAMES: tuple[str, ...] = (
    "boy", "girl",
    "bear", "cat", "dog", "duck", "owl", "snake",
    "sun", "cloud", "rain_cloud", "storm_cloud", "hot_air_balloon", "rocket",
    "apple_tree", "pine_tree", "oak_tree", "bush",
    "slide", "swing", "sandbox", "seesaw", "table", "grill",
    "soccer_ball", "basketball", "baseball", "beach_ball", "tennis_ball", "football",
    "balloon", "kite", "frisbee", "shovel", "pail",
    "bat", "glove", "racket", "paddle",
    "pie", "pizza", "hamburger", "hotdog", "ketchup", "mustard", "soda", "apple", "drink",
    "cap", "chef_hat", "party_hat", "pirate_hat", "witch_hat", "viking_hat",
    "sunglasses", "glasses", "crown", "wand",
)

N_CLIPART_TYPES = len(CLIPART_TYPE_NAMES)
PERSON_TYPE_IDS = frozenset({0, 1})  # boy, girl
N_EXPRESSIONS = 5
N_POSES = 7
# 56 plain types plus 2 person types with 5x7 variants each: 126 gallery elements.
N_GALLERY_ELEMENTS = (N_CLIPART_TYPES - len(PERSON_TYPE_IDS)) + len(PERSON_TYPE_IDS) * N_EXPRESSIONS * N_POSES

CANVAS_WIDTH = 500
CANVAS_HEIGHT = 400
POSITION_TOLERANCE = 1e-6  # positions within this are treated as identical

_PERSON_NAME_RE = re.compile(r"^(boy|girl)([0-9])_([0-9])$")


def asset_name(type_id: int, variant: tuple[int, int] | None) -> str:
    """Art-asset name for a clipart type; persons encode (expression, pose)."""
    base = CLIPART_TYPE_NAMES[type_id]
    if type_id in PERSON_TYPE_IDS:
        if variant is None:
            raise ValueError(f"person type {base!r} requires a variant")
        expression, pose = variant
        return f"{base}{expression}_{pose}"
    if variant is not None:
        raise ValueError(f"non-person type {base!r} carries no variant")
    return base


@dataclass(frozen=True)
class Clipart:
    """One placed clipart. object_key is stable within a dialogue."""

    object_key: str
    type_id: int
    variant: tuple[int, int] | None  # (expression, pose) for persons only
    x: float
    y: float
    depth: int
    flip: bool
    local_index: int = 0

    def __post_init__(self):
        if not 0 <= self.type_id < N_CLIPART_TYPES:
            raise ValueError(f"type_id {self.type_id} out of range")
        if self.depth not in (0, 1, 2):
            raise ValueError(f"depth {self.depth} not in {{0,1,2}}")
        is_person = self.type_id in PERSON_TYPE_IDS
        if is_person and self.variant is None:
            raise ValueError("person clipart requires a variant")
        if not is_person and self.variant is not None:
            raise ValueError("non-person clipart must not carry a variant")
        if self.variant is not None:
            expression, pose = self.variant
            if not (0 <= expression < N_EXPRESSIONS and 0 <= pose < N_POSES):
                raise ValueError(f"variant {self.variant} out of range")

    @property
    def name(self) -> str:
        return asset_name(self.type_id, self.variant)

    def metric_attributes(self) -> tuple:
        """Attributes the similarity metric compares (identity excluded)."""
        return (self.type_id, self.variant, round(self.x, 6), round(self.y, 6), self.depth, self.flip)


def make_clipart(type_id: int, *, x: float, y: float, depth: int = 0, flip: bool = False,
                 variant: tuple[int, int] | None = None, local_index: int = 0) -> Clipart:
    """Build a clipart with its object_key derived from name and local index."""
    key = f"{asset_name(type_id, variant)}#{local_index}"
    return Clipart(object_key=key, type_id=type_id, variant=variant, x=float(x), y=float(y),
                   depth=int(depth), flip=bool(flip), local_index=int(local_index))


@dataclass(frozen=True)
class Scene:
    """A set of placed cliparts. Source scenes hold 6-17; partial states any number."""

    cliparts: tuple[Clipart, ...] = ()

    def __post_init__(self):
        keys = [c.object_key for c in self.cliparts]
        if len(keys) != len(set(keys)):
            dupes = sorted({k for k in keys if keys.count(k) > 1})
            raise ValueError(f"duplicate object keys: {dupes}")

    def __len__(self) -> int:
        return len(self.cliparts)

    def keyed(self) -> dict[str, Clipart]:
        return {c.object_key: c for c in self.cliparts}


EMPTY_SCENE = Scene()


def scenes_equal(a: Scene, b: Scene) -> bool:
    """Order-insensitive equality over object keys and all attributes."""
    return a.keyed() == b.keyed()


@dataclass(frozen=True)
class SceneGrammar:
    """Configurable scene-string grammar.

    strict mode additionally requires canonical numeric forms, no stray
    whitespace, and asset names consistent with the type inventory.
    """

    delimiter: str = ","
    fields: tuple[str, ...] = ("name", "index", "type_id", "x", "y", "depth", "flip")
    strict: bool = False


DEFAULT_GRAMMAR = SceneGrammar()
STRICT_GRAMMAR = SceneGrammar(strict=True)


def _canonical_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _split_with_offsets(text: str, delimiter: str) -> list[tuple[str, int]]:
    parts = []
    offset = 0
    for raw in text.split(delimiter):
        parts.append((raw, offset))
        offset += len(raw) + len(delimiter)
    return parts


class _FieldReader:
    def __init__(self, parts: list[tuple[str, int]], strict: bool, text_len: int):
        self._parts = parts
        self._pos = 0
        self._strict = strict
        self._text_len = text_len

    def take(self, field_name: str) -> tuple[str, int]:
        if self._pos >= len(self._parts):
            raise MalformedSceneString("unexpected end of scene string", offset=self._text_len, field=field_name)
        raw, offset = self._parts[self._pos]
        self._pos += 1
        if self._strict:
            if raw != raw.strip():
                raise MalformedSceneString("stray whitespace", offset=offset, field=field_name)
            return raw, offset
        return raw.strip(), offset

    def exhausted(self) -> bool:
        return self._pos >= len(self._parts)

    def next_offset(self) -> int:
        if self._pos < len(self._parts):
            return self._parts[self._pos][1]
        return self._text_len


def _parse_int(raw: str, offset: int, field_name: str, lo: int, hi: int, strict: bool) -> int:
    try:
        value = int(raw, 10)
    except ValueError:
        raise MalformedSceneString(f"non-numeric field {raw!r}", offset=offset, field=field_name) from None
    if not lo <= value <= hi:
        raise MalformedSceneString(f"value {value} out of range [{lo},{hi}]", offset=offset, field=field_name)
    if strict and raw != str(value):
        raise MalformedSceneString(f"non-canonical integer {raw!r}", offset=offset, field=field_name)
    return value


def _parse_float(raw: str, offset: int, field_name: str, strict: bool) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedSceneString(f"non-numeric field {raw!r}", offset=offset, field=field_name) from None
    if not math.isfinite(value):
        raise MalformedSceneString(f"non-finite value {raw!r}", offset=offset, field=field_name)
    if strict and raw != _canonical_number(value):
        raise MalformedSceneString(f"non-canonical number {raw!r}", offset=offset, field=field_name)
    return value


def parse_scene(scene_string: str, grammar: SceneGrammar = DEFAULT_GRAMMAR) -> Scene:
    """Parse a scene-state string.

    The empty string is accepted as the empty-scene sentinel; the canonical
    serialization of an empty scene is "0".
    """
    if scene_string == "":
        return EMPTY_SCENE
    parts = _split_with_offsets(scene_string, grammar.delimiter)
    reader = _FieldReader(parts, grammar.strict, len(scene_string))
    raw, offset = reader.take("count")
    count = _parse_int(raw, offset, "count", 0, 10**6, grammar.strict)

    cliparts: list[Clipart] = []
    for _ in range(count):
        values: dict[str, object] = {}
        offsets: dict[str, int] = {}
        for field_name in grammar.fields:
            raw, offset = reader.take(field_name)
            offsets[field_name] = offset
            if field_name == "name":
                values[field_name] = raw
            elif field_name == "index":
                values[field_name] = _parse_int(raw, offset, field_name, 0, 10**6, grammar.strict)
            elif field_name == "type_id":
                values[field_name] = _parse_int(raw, offset, field_name, 0, N_CLIPART_TYPES - 1, grammar.strict)
            elif field_name in ("x", "y"):
                values[field_name] = _parse_float(raw, offset, field_name, grammar.strict)
            elif field_name == "depth":
                values[field_name] = _parse_int(raw, offset, field_name, 0, 2, grammar.strict)
            elif field_name == "flip":
                values[field_name] = bool(_parse_int(raw, offset, field_name, 0, 1, grammar.strict))
            else:
                raise MalformedSceneString(f"unknown grammar field {field_name!r}", offset=offset, field=field_name)

        name = str(values["name"])
        type_id = int(values["type_id"])  # type: ignore[arg-type]
        variant: tuple[int, int] | None = None
        if type_id in PERSON_TYPE_IDS:
            match = _PERSON_NAME_RE.match(name)
            if match is None:
                raise MalformedSceneString(f"person asset name {name!r} lacks variant suffix",
                                           offset=offsets["name"], field="name")
            expression, pose = int(match.group(2)), int(match.group(3))
            if expression >= N_EXPRESSIONS or pose >= N_POSES:
                raise MalformedSceneString(f"variant out of range in {name!r}",
                                           offset=offsets["name"], field="name")
            if match.group(1) != CLIPART_TYPE_NAMES[type_id]:
                raise MalformedSceneString(f"person name {name!r} conflicts with type id {type_id}",
                                           offset=offsets["name"], field="name")
            variant = (expression, pose)
        elif grammar.strict and name != CLIPART_TYPE_NAMES[type_id]:
            raise MalformedSceneString(f"asset name {name!r} conflicts with type id {type_id}",
                                       offset=offsets["name"], field="name")

        clipart = make_clipart(type_id, x=values["x"], y=values["y"], depth=values["depth"],  # type: ignore[arg-type]
                               flip=values["flip"], variant=variant, local_index=values["index"])  # type: ignore[arg-type]
        cliparts.append(clipart)

    if not reader.exhausted():
        raise MalformedSceneString(f"{len(parts) - 1 - count * len(grammar.fields)} extra field(s) after "
                                   f"{count} declared clipart(s)", offset=reader.next_offset(), field="count")
    try:
        return Scene(tuple(cliparts))
    except ValueError as exc:
        raise MalformedSceneString(str(exc), offset=0, field="index") from None


def serialize_scene(scene: Scene, grammar: SceneGrammar = DEFAULT_GRAMMAR) -> str:
    """Canonical string for a scene; parse_scene inverts it exactly."""
    parts = [str(len(scene.cliparts))]
    for clipart in scene.cliparts:
        for field_name in grammar.fields:
            if field_name == "name":
                parts.append(clipart.name)
            elif field_name == "index":
                parts.append(str(clipart.local_index))
            elif field_name == "type_id":
                parts.append(str(clipart.type_id))
            elif field_name == "x":
                parts.append(_canonical_number(clipart.x))
            elif field_name == "y":
                parts.append(_canonical_number(clipart.y))
            elif field_name == "depth":
                parts.append(str(clipart.depth))
            elif field_name == "flip":
                parts.append("1" if clipart.flip else "0")
    return grammar.delimiter.join(parts)


def scene_to_json(scene: Scene) -> list[dict]:
    """Self-describing JSON form, used for fixtures."""
    out = []
    for c in scene.cliparts:
        record = {"key": c.object_key, "name": c.name, "index": c.local_index, "type_id": c.type_id,
                  "x": c.x, "y": c.y, "depth": c.depth, "flip": c.flip}
        if c.variant is not None:
            record["expression"], record["pose"] = c.variant
        out.append(record)
    return out


def scene_from_json(records: Iterable[dict]) -> Scene:
    cliparts = []
    for r in records:
        variant = (r["expression"], r["pose"]) if "expression" in r else None
        cliparts.append(make_clipart(r["type_id"], x=r["x"], y=r["y"], depth=r["depth"],
                                     flip=r["flip"], variant=variant, local_index=r.get("index", 0)))
    return Scene(tuple(cliparts))


class ActionKind(Enum):
    ADD = "add"
    DELETE = "delete"
    MOVE = "move"
    RESIZE = "resize"
    FLIP = "flip"
    NO_ACTION = "no_action"


@dataclass(frozen=True)
class Action:
    """One attribute-level drawing action; before/after hold the changed values."""

    kind: ActionKind
    object_key: str | None = None
    before: object = None
    after: object = None


NO_ACTION = Action(ActionKind.NO_ACTION)


def _positions_differ(a: Clipart, b: Clipart) -> bool:
    return abs(a.x - b.x) > POSITION_TOLERANCE or abs(a.y - b.y) > POSITION_TOLERANCE


def diff_scenes(prev: Scene, curr: Scene) -> list[Action]:
    """Minimal attribute-level action list turning prev into curr.

    One Add per new key, one Delete per removed key, and one Move/Resize/Flip
    per changed attribute class on surviving keys. Returns [NO_ACTION] iff the
    scenes are attribute-identical. Position changes at or below the identity
    tolerance are treated as unchanged.
    """
    prev_by_key = prev.keyed()
    curr_by_key = curr.keyed()
    actions: list[Action] = []

    for key, before in prev_by_key.items():
        if key not in curr_by_key:
            actions.append(Action(ActionKind.DELETE, key, before=before))
            continue
        after = curr_by_key[key]
        if _positions_differ(before, after):
            actions.append(Action(ActionKind.MOVE, key, before=(before.x, before.y), after=(after.x, after.y)))
        if before.depth != after.depth:
            actions.append(Action(ActionKind.RESIZE, key, before=before.depth, after=after.depth))
        if before.flip != after.flip:
            actions.append(Action(ActionKind.FLIP, key, before=before.flip, after=after.flip))
    for key, after in curr_by_key.items():
        if key not in prev_by_key:
            actions.append(Action(ActionKind.ADD, key, after=after))

    return actions if actions else [NO_ACTION]


def replay_actions(prev: Scene, actions: Sequence[Action]) -> Scene:
    """Apply a diff_scenes action list to prev."""
    by_key = dict(prev.keyed())
    order = [c.object_key for c in prev.cliparts]
    for action in actions:
        if action.kind is ActionKind.NO_ACTION:
            continue
        key = action.object_key
        if action.kind is ActionKind.ADD:
            by_key[key] = action.after  # type: ignore[assignment]
            order.append(key)
        elif action.kind is ActionKind.DELETE:
            del by_key[key]
            order.remove(key)
        elif action.kind is ActionKind.MOVE:
            x, y = action.after  # type: ignore[misc]
            by_key[key] = replace(by_key[key], x=x, y=y)
        elif action.kind is ActionKind.RESIZE:
            by_key[key] = replace(by_key[key], depth=action.after)  # type: ignore[arg-type]
        elif action.kind is ActionKind.FLIP:
            by_key[key] = replace(by_key[key], flip=action.after)  # type: ignore[arg-type]
    return Scene(tuple(by_key[k] for k in order))


@dataclass(frozen=True)
class ActionCount:
    total: int
    additions: int
    edits: int  # deletes, moves, resizes, flips
    by_kind: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict[str, int]:
        return dict(self.by_kind)


def count_actions(actions: Sequence[Action]) -> ActionCount:
    """Action count and per-kind breakdown; NO_ACTION contributes zero."""
    counts: dict[str, int] = {}
    total = 0
    for action in actions:
        if action.kind is ActionKind.NO_ACTION:
            continue
        total += 1
        counts[action.kind.value] = counts.get(action.kind.value, 0) + 1
    additions = counts.get(ActionKind.ADD.value, 0)
    return ActionCount(total=total, additions=additions, edits=total - additions,
                       by_kind=tuple(sorted(counts.items())))


@dataclass(frozen=True)
class ComponentSimilarity:
    """Reference similarity: 5 x presence-F1 x mean attribute agreement.

    Cliparts are matched by type id as multisets (greedy nearest-position
    within a type). Matched pairs score the mean of flip equality, depth
    equality, person-variant equality, and 1 minus the canvas-normalized
    position error; positions within the identity tolerance score exactly 1.
    """

    canvas_width: float = CANVAS_WIDTH
    canvas_height: float = CANVAS_HEIGHT
    position_tolerance: float = POSITION_TOLERANCE

    def __call__(self, source: Scene, reconstruction: Scene) -> float:
        if len(source) == 0:
            raise EmptySourceScene("source scene has no cliparts")
        pairs = self._match(source, reconstruction)
        matched = len(pairs)
        if matched == 0:
            return 0.0
        presence_f1 = 2.0 * matched / (len(source) + len(reconstruction))
        agreement = sum(self._pair_agreement(s, r) for s, r in pairs) / matched
        return 5.0 * presence_f1 * agreement

    def _match(self, source: Scene, reconstruction: Scene) -> list[tuple[Clipart, Clipart]]:
        recon_by_type: dict[int, list[Clipart]] = {}
        for c in reconstruction.cliparts:
            recon_by_type.setdefault(c.type_id, []).append(c)
        pairs = []
        for s in sorted(source.cliparts, key=lambda c: c.object_key):
            candidates = recon_by_type.get(s.type_id)
            if not candidates:
                continue
            best = min(candidates, key=lambda r: (math.hypot(r.x - s.x, r.y - s.y), r.object_key))
            candidates.remove(best)
            pairs.append((s, best))
        return pairs

    def _pair_agreement(self, s: Clipart, r: Clipart) -> float:
        dist = math.hypot(r.x - s.x, r.y - s.y)
        if dist <= self.position_tolerance:
            position = 1.0
        else:
            diagonal = math.hypot(self.canvas_width, self.canvas_height)
            position = 1.0 - min(1.0, dist / diagonal)
        terms = [1.0 if s.flip == r.flip else 0.0,
                 1.0 if s.depth == r.depth else 0.0,
                 position]
        if s.type_id in PERSON_TYPE_IDS:
            terms.append(1.0 if s.variant == r.variant else 0.0)
        return sum(terms) / len(terms)


DEFAULT_METRIC = ComponentSimilarity()

SimilarityMetric = Callable[[Scene, Scene], float]


def scene_similarity(source: Scene, reconstruction: Scene,
                     metric: SimilarityMetric = DEFAULT_METRIC) -> float:
    """Similarity in [0,5]; 5 is a perfect match. The metric is pluggable."""
    return metric(source, reconstruction)
