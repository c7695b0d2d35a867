"""Batch extraction of context, message, and scene embeddings into stores.

Output order is deterministic (corpus order for texts, first-reference order
for scenes) regardless of encoder batching, and identical scenes are rendered
and encoded once, so the empty scene maps to one fixed vector reused for all
its keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from icr.corpus import Corpus
from icr.datasets import ContextFilter, Task, enumerate_inputs
from icr.scene import Scene
from icr.stores import EmbeddingStore, IMAGE_DIM, TEXT_DIM, missing_keys, write_store

from .encoders import ImageEncoder, TextEncoder
from .render import CanvasGeometry, DEFAULT_GEOMETRY, render_scene, raster_bytes


def extract_text(corpus: Corpus, task: Task, encoder: TextEncoder,
                 context_filter: ContextFilter = ContextFilter.NONE,
                 batch_size: int = 256) -> tuple[EmbeddingStore, EmbeddingStore]:
    """One 768-d vector per context and message key."""
    inputs = enumerate_inputs(corpus, task, context_filter)
    ctx_store = EmbeddingStore(dim=TEXT_DIM, fallback=encoder.is_fallback)
    msg_store = EmbeddingStore(dim=TEXT_DIM, fallback=encoder.is_fallback)
    for start in range(0, len(inputs), batch_size):
        chunk = inputs[start:start + batch_size]
        ctx_vecs = encoder.encode([rec.context_text for rec in chunk])
        msg_vecs = encoder.encode([rec.message_text for rec in chunk])
        for rec, ctx_vec, msg_vec in zip(chunk, ctx_vecs, msg_vecs):
            ctx_store.add(rec.ctx_key, ctx_vec)
            msg_store.add(rec.msg_key, msg_vec)
    return ctx_store, msg_store


def _scenes_for_task(corpus: Corpus, task: Task) -> list[tuple[str, Scene]]:
    out: list[tuple[str, Scene]] = []
    for dialogue in corpus:
        if task is Task.TASK2:
            out.append((f"{dialogue.id}/src/img", dialogue.source_scene))
        else:
            for r in dialogue.rounds:
                if r.drawer_msg is not None:
                    out.append((f"{dialogue.id}/{r.index}/img", r.scene_after))
    return out


def extract_image(corpus: Corpus, task: Task, encoder: ImageEncoder,
                  geometry: CanvasGeometry = DEFAULT_GEOMETRY,
                  assets_dir: str | Path | None = None,
                  batch_size: int = 64) -> EmbeddingStore:
    """One 2048-d vector per scene key; identical rasters share one vector."""
    keyed_scenes = _scenes_for_task(corpus, task)
    store = EmbeddingStore(dim=IMAGE_DIM, fallback=encoder.is_fallback)
    cache: dict[bytes, np.ndarray] = {}
    pending_images = []
    pending_digests = []
    key_digest: list[tuple[str, bytes]] = []
    seen_digests: set[bytes] = set()
    for key, scene in keyed_scenes:
        image = render_scene(scene, geometry, assets_dir)
        digest = raster_bytes(image)
        key_digest.append((key, digest))
        if digest not in seen_digests:
            seen_digests.add(digest)
            pending_images.append(image)
            pending_digests.append(digest)
    for start in range(0, len(pending_images), batch_size):
        chunk = pending_images[start:start + batch_size]
        vectors = encoder.encode(chunk)
        for digest, vector in zip(pending_digests[start:start + batch_size], vectors):
            cache[digest] = vector
    for key, digest in key_digest:
        store.add(key, cache[digest])
    return store


@dataclass
class ExtractionResult:
    paths: dict[str, Path]
    manifest: dict


def run_extraction(corpus: Corpus, task: Task, out_dir: str | Path,
                   text_encoder: TextEncoder, image_encoder: ImageEncoder,
                   geometry: CanvasGeometry = DEFAULT_GEOMETRY,
                   assets_dir: str | Path | None = None) -> ExtractionResult:
    """Extract all three stores, verify key coverage, and write a manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx_store, msg_store = extract_text(corpus, task, text_encoder)
    img_store = extract_image(corpus, task, image_encoder, geometry, assets_dir)

    inputs = enumerate_inputs(corpus, task)
    gaps = {
        "ctx": missing_keys(ctx_store, [rec.ctx_key for rec in inputs]),
        "msg": missing_keys(msg_store, [rec.msg_key for rec in inputs]),
        "img": missing_keys(img_store, [rec.scene_key for rec in inputs]),
    }
    if any(gaps.values()):
        raise RuntimeError(f"extraction left uncovered keys: { {k: len(v) for k, v in gaps.items()} }")

    paths = {}
    for field, store in (("ctx", ctx_store), ("msg", msg_store), ("img", img_store)):
        path = out_dir / f"{task.value}.{field}.icre"
        write_store(store, path)
        paths[field] = path
    manifest = {
        "task": task.value,
        "text_model": text_encoder.name,
        "image_model": image_encoder.name,
        "fallback": {"text": text_encoder.is_fallback, "image": image_encoder.is_fallback},
        "geometry": geometry.as_dict(),
        "assets": None if assets_dir is None else str(assets_dir),
        "records": {"ctx": len(ctx_store), "msg": len(msg_store), "img": len(img_store)},
        "coverage": "complete",
    }
    (out_dir / f"{task.value}.extraction_manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return ExtractionResult(paths=paths, manifest=manifest)


def peek_probe(corpus: Corpus, utterance_labels, encoder: TextEncoder,
               seed: int = 0) -> dict:
    """Linear probe: do pre-peek context embeddings predict whether any
    clarification occurred so far in the dialogue?

    Uses the Task 1 context at the peek round of every dialogue that has a
    peek; trains on the train split, reports average precision and macro-F1
    on the validation split.
    """
    from icr.annotation import Label
    from icr.evaluation import average_precision, macro_f1
    from icr.models import fit_logistic

    texts: dict[str, list[str]] = {"train": [], "val": []}
    labels: dict[str, list[int]] = {"train": [], "val": []}
    by_key = {(rec.dialogue_id, rec.round_index): rec.context_text
              for rec in enumerate_inputs(corpus, Task.TASK1)}
    for dialogue in corpus:
        if dialogue.split not in texts:
            continue
        peek = next((r.index for r in dialogue.rounds if r.is_peek_round), None)
        if peek is None or (dialogue.id, peek) not in by_key:
            continue
        any_icr = any(utterance_labels.get((dialogue.id, r.index)) is Label.ICR
                      for r in dialogue.rounds if r.index < peek)
        texts[dialogue.split].append(by_key[(dialogue.id, peek)])
        labels[dialogue.split].append(int(any_icr))

    x_train = encoder.encode(texts["train"])
    x_val = encoder.encode(texts["val"])
    model = fit_logistic(x_train, np.array(labels["train"]), seed=seed)
    scores = model.scores(x_val)
    y_val = np.array(labels["val"])
    return {
        "n_train": len(labels["train"]),
        "n_val": len(labels["val"]),
        "ap": average_precision(scores, y_val),
        "macro_f1": macro_f1(scores, y_val),
    }
