"""Deterministic synthetic corpora for desk-scale runs and fixtures.

The generator emits a dialogue JSON payload, planted per-form labels, and a
manifest of exact counts (dialogues, rounds, drawer utterances, types,
clarification positions) that tests check against the pipeline's output.

Drawer replies are drawn independently of the teller's text, so the teller
side carries no signal about whether the reply is a clarification. Planted
clarification forms always contain a default content word and acknowledgement
forms never do, which makes the content-word labeler reproduce the planted
labels exactly.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .annotation import Label, LabelSet, UtteranceType
from .scene import (
    CLIPART_TYPE_NAMES,
    N_CLIPART_TYPES,
    N_EXPRESSIONS,
    N_POSES,
    PERSON_TYPE_IDS,
    Scene,
    make_clipart,
    serialize_scene,
)

ICR_FORMS = (
    "which tree ?",
    "what size ?",
    "big or small ?",
    "facing left or right ?",
    "where is the table ?",
    "how big is the cloud ?",
    "is the boy on the left ?",
    "which ball do you mean ?",
    "top or bottom ?",
    "what size is the bear ?",
    "near the edge ?",
    "is it touching the horizon ?",
    "what pose ?",
    "how high up ?",
    "small medium or large ?",
)

ACK_FORMS = (
    "ok",
    "okay",
    "done",
    "got it",
    "ready",
    "all set",
    "on it",
    "yes",
    "yep",
    "sure thing",
    "okay done",
    "alright",
    "thanks",
    "will do",
    "one moment",
)

_ICR_SINGLETON_NOUNS = ("tree", "ball", "cloud", "bear", "table", "boy", "girl", "hat", "kite", "dog")


@dataclass
class GeneratorConfig:
    n_dialogues: int = 30
    split_weights: tuple[float, float, float] = (0.8, 0.1, 0.1)  # train, val, test
    min_rounds: int = 3
    max_rounds: int = 12
    icr_rate: float = 0.11
    singleton_rate: float = 0.25  # share of drawn replies that get a unique form
    perturb_prob: float = 0.25
    wrong_flip_prob: float = 0.1
    spurious_prob: float = 0.05
    with_peek_prob: float = 0.85
    truncate_prob: float = 0.05
    seed: int = 0


@dataclass
class SyntheticCorpus:
    payload: dict  # dialogue JSON, ready to dump
    form_labels: dict[str, str]  # form -> "iCR" | "notICR"
    manifest: dict

    def write(self, corpus_path: str | Path, manifest_path: str | Path | None = None) -> None:
        Path(corpus_path).write_text(json.dumps(self.payload, ensure_ascii=False), encoding="utf-8")
        if manifest_path is not None:
            manifest = dict(self.manifest)
            manifest["form_labels"] = self.form_labels
            Path(manifest_path).write_text(json.dumps(manifest, ensure_ascii=False, indent=1),
                                           encoding="utf-8")


def _region(x: float, y: float) -> str:
    horizontal = "left" if x < 250 else "right"
    vertical = "top" if y < 200 else "bottom"
    return f"{vertical} {horizontal}"


@dataclass
class _ClipartPlan:
    clipart: object
    add_round: int
    wrong_position: tuple[float, float] | None = None
    fix_position_round: int | None = None
    wrong_flip: bool = False
    fix_flip_round: int | None = None


def _plan_dialogue(rng: np.random.Generator, cfg: GeneratorConfig):
    n_rounds = int(rng.integers(cfg.min_rounds, cfg.max_rounds + 1))
    n_cliparts = int(rng.integers(6, 18))
    type_ids = rng.choice(N_CLIPART_TYPES, size=n_cliparts, replace=False)
    cliparts = []
    for local_index, type_id in enumerate(int(t) for t in type_ids):
        variant = None
        if type_id in PERSON_TYPE_IDS:
            variant = (int(rng.integers(0, N_EXPRESSIONS)), int(rng.integers(0, N_POSES)))
        cliparts.append(make_clipart(
            type_id,
            x=float(rng.integers(0, 500)),
            y=float(rng.integers(0, 400)),
            depth=int(rng.integers(0, 3)),
            flip=bool(rng.integers(0, 2)),
            variant=variant,
            local_index=local_index,
        ))
    source = Scene(tuple(cliparts))

    plans: list[_ClipartPlan] = []
    for i, clipart in enumerate(cliparts):
        add_round = min(n_rounds - 1, i * n_rounds // n_cliparts)
        plan = _ClipartPlan(clipart=clipart, add_round=add_round)
        if add_round < n_rounds - 1 and rng.random() < cfg.perturb_prob:
            dx = float(rng.integers(40, 200)) * (1 if rng.random() < 0.5 else -1)
            dy = float(rng.integers(40, 200)) * (1 if rng.random() < 0.5 else -1)
            plan.wrong_position = (min(499.0, max(0.0, clipart.x + dx)),
                                   min(399.0, max(0.0, clipart.y + dy)))
            plan.fix_position_round = int(rng.integers(add_round + 1, n_rounds))
        if add_round < n_rounds - 1 and rng.random() < cfg.wrong_flip_prob:
            plan.wrong_flip = True
            plan.fix_flip_round = int(rng.integers(add_round + 1, n_rounds))
        plans.append(plan)

    spurious = None
    if rng.random() < cfg.spurious_prob and n_rounds >= 3:
        free_types = sorted(set(range(N_CLIPART_TYPES)) - {c.type_id for c in cliparts} - PERSON_TYPE_IDS)
        spurious_type = int(rng.choice(free_types))
        spurious_clipart = make_clipart(spurious_type, x=float(rng.integers(0, 500)),
                                        y=float(rng.integers(0, 400)), depth=0, flip=False,
                                        local_index=100)
        add_at = int(rng.integers(0, n_rounds - 1))
        spurious = (spurious_clipart, add_at, int(rng.integers(add_at + 1, n_rounds)))
    return n_rounds, source, plans, spurious


def _scene_at(plans: Sequence[_ClipartPlan], spurious, round_index: int) -> Scene:
    from dataclasses import replace as dc_replace

    current = []
    for plan in plans:
        if round_index < plan.add_round:
            continue
        c = plan.clipart
        if plan.wrong_position is not None and (plan.fix_position_round is None
                                                or round_index < plan.fix_position_round):
            c = dc_replace(c, x=plan.wrong_position[0], y=plan.wrong_position[1])
        if plan.wrong_flip and (plan.fix_flip_round is None or round_index < plan.fix_flip_round):
            c = dc_replace(c, flip=not c.flip)
        current.append(c)
    if spurious is not None:
        clipart, add_at, delete_at = spurious
        if add_at <= round_index < delete_at:
            current.append(clipart)
    return Scene(tuple(current))


def generate(cfg: GeneratorConfig) -> SyntheticCorpus:
    rng = np.random.default_rng(cfg.seed)
    weights = np.asarray(cfg.split_weights, dtype=np.float64)
    n_train = int(round(cfg.n_dialogues * weights[0] / weights.sum()))
    n_val = int(round(cfg.n_dialogues * weights[1] / weights.sum()))
    split_of = lambda k: "train" if k < n_train else ("val" if k < n_train + n_val else "test")

    payload: dict[str, dict] = {}
    form_labels: dict[str, str] = {}
    form_occurrences: Counter = Counter()
    icr_positions: list[list] = []
    per_split = {s: {"dialogues": 0, "rounds": 0, "drawer_utterances": 0, "icr_utterances": 0}
                 for s in ("train", "val", "test")}
    singleton_counter = 0
    per_dialogue_rounds: dict[str, int] = {}

    for k in range(cfg.n_dialogues):
        split = split_of(k)
        counts = per_split[split]
        dialogue_id = f"{split}_{counts['dialogues']:05d}"
        counts["dialogues"] += 1
        n_rounds, source, plans, spurious = _plan_dialogue(rng, cfg)
        per_dialogue_rounds[dialogue_id] = n_rounds
        counts["rounds"] += n_rounds

        peek_round = None
        if rng.random() < cfg.with_peek_prob and n_rounds >= 2:
            lo = max(1, int(n_rounds * 0.6))
            peek_round = int(rng.integers(lo, n_rounds))
        truncate = rng.random() < cfg.truncate_prob and n_rounds >= 2

        turns = []
        for i in range(n_rounds):
            added = [p.clipart for p in plans if p.add_round == i]
            if added:
                c = added[0]
                teller = f"place the {CLIPART_TYPE_NAMES[c.type_id]} at the {_region(c.x, c.y)}"
                if len(added) > 1:
                    teller += f" and add the {CLIPART_TYPE_NAMES[added[1].type_id]} too"
            elif i == peek_round:
                teller = "let me take a look at your canvas"
            else:
                teller = "now fix anything that looks off"
            turn = {"msg_t": teller, "abs_d": serialize_scene(_scene_at(plans, spurious, i))}
            if peek_round is not None and i == peek_round:
                turn["peeked"] = True

            if not (truncate and i == n_rounds - 1):
                if rng.random() < cfg.icr_rate:
                    if rng.random() < cfg.singleton_rate:
                        noun = _ICR_SINGLETON_NOUNS[singleton_counter % len(_ICR_SINGLETON_NOUNS)]
                        form = f"is the {noun} near spot {singleton_counter} ?"
                        singleton_counter += 1
                    else:
                        form = ICR_FORMS[int(rng.integers(0, len(ICR_FORMS)))]
                    form_labels[form] = Label.ICR.value
                    counts["icr_utterances"] += 1
                    icr_positions.append([dialogue_id, i])
                else:
                    if rng.random() < cfg.singleton_rate:
                        form = f"roger number {singleton_counter}"
                        singleton_counter += 1
                    else:
                        form = ACK_FORMS[int(rng.integers(0, len(ACK_FORMS)))]
                    form_labels[form] = Label.NOT_ICR.value
                turn["msg_d"] = form
                form_occurrences[form] += 1
                counts["drawer_utterances"] += 1
            turns.append(turn)

        payload[dialogue_id] = {"abs_t": serialize_scene(source), "dialog": turns}

    totals = {key: sum(per_split[s][key] for s in per_split)
              for key in ("dialogues", "rounds", "drawer_utterances", "icr_utterances")}
    manifest = {
        "seed": cfg.seed,
        "splits": per_split,
        "totals": totals,
        "n_types": len(form_labels),
        "n_icr_types": sum(1 for v in form_labels.values() if v == Label.ICR.value),
        "n_singleton_types": sum(1 for c in form_occurrences.values() if c == 1),
        "icr_positions": icr_positions,
        "per_dialogue_rounds": per_dialogue_rounds,
        "icr_rate_planted": (totals["icr_utterances"] / totals["drawer_utterances"]
                             if totals["drawer_utterances"] else 0.0),
    }
    return SyntheticCorpus(payload={"data": payload}, form_labels=form_labels, manifest=manifest)


def labels_for_types(types: Sequence[UtteranceType], form_labels: dict[str, str],
                     annotator_id: str = "generator") -> LabelSet:
    """LabelSet over collapsed types using the generator's planted labels."""
    labels = LabelSet(annotator_id=annotator_id)
    for t in types:
        labels.labels[t.type_id] = Label(form_labels[t.form])
    return labels


def content_word_labels(types: Sequence[UtteranceType], content_words: frozenset[str],
                        annotator_id: str = "content-word-labeler") -> LabelSet:
    """Synthetic labeler: positive iff the form contains a content word."""
    labels = LabelSet(annotator_id=annotator_id)
    for t in types:
        hit = any(token in content_words for token in t.form.split())
        labels.labels[t.type_id] = Label.ICR if hit else Label.NOT_ICR
    return labels
