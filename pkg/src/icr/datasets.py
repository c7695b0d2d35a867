"""Task 1 / Task 2 datapoint assembly and the feature-baseline vectors.

Task 1 asks, after each teller utterance, whether the drawer's reply will be
a clarification request: the context holds all utterances strictly before the
teller message, which itself is the classified message. Task 2 asks whether a
given drawer reply was one: the context additionally includes the teller
message of the round, and the drawer reply is the classified message (never
part of the context, so the no-message ablation degrades Task 2 to roughly
Task 1).

Contexts carry speaker markers (/T, /D), peek markers (/PEEK), and are
truncated to their final 200 tokens. Marker tokens count toward the budget.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .annotation import Label
from .corpus import Corpus, Dialogue, Round, Utterance

CONTEXT_TOKEN_LIMIT = 200
TELLER_MARKER = "/T"
DRAWER_MARKER = "/D"
PEEK_MARKER = "/PEEK"


class Task(Enum):
    TASK1 = "task1"
    TASK2 = "task2"


class ContextFilter(Enum):
    NONE = "none"
    DROP_TELLER = "drop_teller"  # context w/o teller utterances
    DROP_DRAWER = "drop_drawer"  # context w/o drawer utterances


@dataclass(frozen=True)
class Datapoint:
    task: Task
    dialogue_id: str
    round_index: int
    context_text: str
    message_text: str
    scene_key: str
    label: Label

    @property
    def ctx_key(self) -> str:
        return f"{self.dialogue_id}/{self.round_index}/ctx"

    @property
    def msg_key(self) -> str:
        return f"{self.dialogue_id}/{self.round_index}/msg"


def _marked(utterance: Utterance, marker: str, peeked: bool) -> list[str]:
    tokens = [PEEK_MARKER, marker] if peeked else [marker]
    tokens.extend(utterance.tokens)
    return tokens


def mark_context(rounds: Sequence[Round], peek_round: int | None = None,
                 final_teller: Utterance | None = None,
                 limit: int = CONTEXT_TOKEN_LIMIT,
                 context_filter: ContextFilter = ContextFilter.NONE) -> list[str]:
    """Concatenate marked utterances in order and keep the last `limit` tokens.

    rounds are the complete rounds before the boundary; final_teller, when
    given, appends the boundary round's teller message (Task 2 contexts).
    """
    tokens: list[str] = []
    for r in rounds:
        peeked = peek_round is not None and r.index == peek_round
        if context_filter is not ContextFilter.DROP_TELLER:
            tokens.extend(_marked(r.teller_msg, TELLER_MARKER, peeked))
        if r.drawer_msg is not None and context_filter is not ContextFilter.DROP_DRAWER:
            tokens.extend(_marked(r.drawer_msg, DRAWER_MARKER, peeked))
    if final_teller is not None and context_filter is not ContextFilter.DROP_TELLER:
        peeked = peek_round is not None and final_teller.round_index == peek_round
        tokens.extend(_marked(final_teller, TELLER_MARKER, peeked))
    return tokens[-limit:] if limit is not None else tokens


@dataclass(frozen=True)
class DatapointInputs:
    """Label-free datapoint text, shared by dataset building and embedding
    extraction so both construct identical inputs."""

    dialogue_id: str
    round_index: int
    context_text: str
    message_text: str
    scene_key: str

    @property
    def ctx_key(self) -> str:
        return f"{self.dialogue_id}/{self.round_index}/ctx"

    @property
    def msg_key(self) -> str:
        return f"{self.dialogue_id}/{self.round_index}/msg"


def _peek_index(dialogue: Dialogue) -> int | None:
    for r in dialogue.rounds:
        if r.is_peek_round:
            return r.index
    return None


def enumerate_inputs(corpus: Corpus, task: Task,
                     context_filter: ContextFilter = ContextFilter.NONE,
                     limit: int = CONTEXT_TOKEN_LIMIT) -> list[DatapointInputs]:
    """One record per round with a drawer utterance, in corpus order."""
    out: list[DatapointInputs] = []
    for dialogue in corpus:
        peek = _peek_index(dialogue)
        for i, r in enumerate(dialogue.rounds):
            if r.drawer_msg is None:
                continue
            history = dialogue.rounds[:i]
            if task is Task.TASK1:
                context = mark_context(history, peek, limit=limit, context_filter=context_filter)
                message = r.teller_msg.text
                scene_key = f"{dialogue.id}/{r.index}/img"
            else:
                context = mark_context(history, peek, final_teller=r.teller_msg,
                                       limit=limit, context_filter=context_filter)
                message = r.drawer_msg.text
                scene_key = f"{dialogue.id}/src/img"
            out.append(DatapointInputs(
                dialogue_id=dialogue.id,
                round_index=r.index,
                context_text=" ".join(context),
                message_text=message,
                scene_key=scene_key,
            ))
    return out


def _attach_labels(inputs: list[DatapointInputs], task: Task,
                   labels: Mapping[tuple[str, int], Label]) -> list[Datapoint]:
    out = []
    for rec in inputs:
        label = labels[(rec.dialogue_id, rec.round_index)]
        out.append(Datapoint(task=task, dialogue_id=rec.dialogue_id, round_index=rec.round_index,
                             context_text=rec.context_text, message_text=rec.message_text,
                             scene_key=rec.scene_key, label=label))
    return out


def build_task1(corpus: Corpus, labels: Mapping[tuple[str, int], Label],
                context_filter: ContextFilter = ContextFilter.NONE) -> list[Datapoint]:
    """Ask-an-iCR datapoints: context before g_i, message g_i, scene s_i."""
    return _attach_labels(enumerate_inputs(corpus, Task.TASK1, context_filter), Task.TASK1, labels)


def build_task2(corpus: Corpus, labels: Mapping[tuple[str, int], Label],
                context_filter: ContextFilter = ContextFilter.NONE) -> list[Datapoint]:
    """Was-it-an-iCR datapoints: context through g_i, message f_i, scene S."""
    return _attach_labels(enumerate_inputs(corpus, Task.TASK2, context_filter), Task.TASK2, labels)


def build_dataset(corpus: Corpus, labels: Mapping[tuple[str, int], Label], task: Task,
                  context_filter: ContextFilter = ContextFilter.NONE) -> list[Datapoint]:
    builder = build_task1 if task is Task.TASK1 else build_task2
    return builder(corpus, labels, context_filter)


def split_datapoints(datapoints: Sequence[Datapoint]) -> dict[str, list[Datapoint]]:
    out: dict[str, list[Datapoint]] = {"train": [], "val": [], "test": []}
    for dp in datapoints:
        out[dp.dialogue_id.split("_", 1)[0]].append(dp)
    return out


# ---------------------------------------------------------------------------
# Feature baselines
# ---------------------------------------------------------------------------

def teller_vocabulary(corpus: Corpus, split: str = "train") -> tuple[str, ...]:
    """Sorted teller token vocabulary, fixed from one split (training only)."""
    vocab: set[str] = set()
    for dialogue in corpus.by_split(split):
        for r in dialogue.rounds:
            vocab.update(r.teller_msg.tokens)
    return tuple(sorted(vocab))


def load_content_words(path: str | Path | None = None) -> frozenset[str]:
    if path is None:
        payload = json.loads(resources.files("icr.data").joinpath("content_words.json").read_text("utf-8"))
    else:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return frozenset(payload["words"])


def featurize(dp: Datapoint, vocab: Sequence[str] | None = None,
              content_words: frozenset[str] | None = None) -> np.ndarray:
    """Feature vector for the logistic baseline.

    Task 1: message token count plus a boolean bag-of-words over the teller
    vocabulary (unseen tokens set no bit). Task 2: message token count plus a
    binary content-word indicator.
    """
    tokens = dp.message_text.split()
    if dp.task is Task.TASK1:
        if vocab is None:
            raise ValueError("Task 1 features need the teller vocabulary")
        index = {token: k for k, token in enumerate(vocab)}
        vec = np.zeros(1 + len(vocab), dtype=np.float64)
        vec[0] = len(tokens)
        for token in tokens:
            k = index.get(token)
            if k is not None:
                vec[1 + k] = 1.0
        return vec
    if content_words is None:
        content_words = load_content_words()
    indicator = 1.0 if any(t in content_words for t in tokens) else 0.0
    return np.array([len(tokens), indicator], dtype=np.float64)


def featurize_all(datapoints: Sequence[Datapoint], vocab: Sequence[str] | None = None,
                  content_words: frozenset[str] | None = None) -> np.ndarray:
    if not datapoints:
        return np.zeros((0, 0))
    if datapoints[0].task is Task.TASK1 and vocab is not None:
        # One shared index; per-datapoint featurize would rebuild it each call.
        index = {token: k for k, token in enumerate(vocab)}
        X = np.zeros((len(datapoints), 1 + len(vocab)), dtype=np.float64)
        for row, dp in enumerate(datapoints):
            tokens = dp.message_text.split()
            X[row, 0] = len(tokens)
            for token in tokens:
                k = index.get(token)
                if k is not None:
                    X[row, 1 + k] = 1.0
        return X
    return np.stack([featurize(dp, vocab, content_words) for dp in datapoints])


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def write_datapoints(datapoints: Sequence[Datapoint], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for dp in datapoints:
            fh.write(json.dumps({
                "task": dp.task.value,
                "dialogue_id": dp.dialogue_id,
                "round": dp.round_index,
                "context": dp.context_text,
                "message": dp.message_text,
                "scene_key": dp.scene_key,
                "label": dp.label.value,
            }, ensure_ascii=False) + "\n")


def read_datapoints(path: str | Path) -> list[Datapoint]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            r = json.loads(line)
            out.append(Datapoint(task=Task(r["task"]), dialogue_id=r["dialogue_id"],
                                 round_index=int(r["round"]), context_text=r["context"],
                                 message_text=r["message"], scene_key=r["scene_key"],
                                 label=Label(r["label"])))
    return out


def write_features(X: np.ndarray, labels: Sequence[Label], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("label\t" + "\t".join(f"f{k}" for k in range(X.shape[1])) + "\n")
        for row, label in zip(X, labels):
            fh.write(label.value + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
