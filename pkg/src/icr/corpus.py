"""Round-structured dialogue corpus: loading, score trajectories, validation.

The default dialogue JSON schema maps "<split>_<id>" keys to an object with
the source scene string and an ordered list of turns, each holding the teller
message, the drawer message, the post-round scene string, and a peek flag.
Field names are configurable aliases so the loader can bind to a differently
named release without code changes. Utterance text is already tokenized
upstream; tokens are recovered by splitting on blank spaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import SceneParseError, SchemaError, MalformedSceneString
from .scene import (
    Action,
    EMPTY_SCENE,
    Scene,
    SimilarityMetric,
    DEFAULT_METRIC,
    DEFAULT_GRAMMAR,
    SceneGrammar,
    count_actions,
    diff_scenes,
    parse_scene,
    scene_similarity,
    scenes_equal,
    replay_actions,
)

SPLITS = ("train", "val", "test")


class Speaker(Enum):
    TELLER = "teller"
    DRAWER = "drawer"


@dataclass(frozen=True)
class Utterance:
    speaker: Speaker
    text: str
    round_index: int

    @property
    def tokens(self) -> list[str]:
        return self.text.split()


@dataclass(frozen=True)
class Round:
    index: int
    teller_msg: Utterance
    drawer_msg: Utterance | None  # absent for truncated final rounds
    scene_after: Scene
    actions: tuple[Action, ...]
    is_peek_round: bool = False


@dataclass(frozen=True)
class Dialogue:
    id: str
    split: str
    source_scene: Scene
    rounds: tuple[Round, ...]
    final_score: float


@dataclass(frozen=True)
class Corpus:
    dialogues: tuple[Dialogue, ...]

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self.dialogues)

    def by_split(self, split: str) -> list[Dialogue]:
        return [d for d in self.dialogues if d.split == split]

    def drawer_utterances(self) -> Iterator[tuple[Dialogue, Round, Utterance]]:
        for dialogue in self.dialogues:
            for round_ in dialogue.rounds:
                if round_.drawer_msg is not None:
                    yield dialogue, round_, round_.drawer_msg

    def peek_index(self, dialogue: Dialogue) -> int | None:
        for round_ in dialogue.rounds:
            if round_.is_peek_round:
                return round_.index
        return None


@dataclass(frozen=True)
class SchemaConfig:
    """Field-name aliases for the dialogue JSON file."""

    data_wrapper: str = "data"  # optional top-level wrapper key
    source_scene: str = "abs_t"
    turns: str = "dialog"
    teller_text: str = "msg_t"
    drawer_text: str = "msg_d"
    scene_after: str = "abs_d"
    peek_flag: str = "peeked"


DEFAULT_SCHEMA = SchemaConfig()


def _split_of(dialogue_id: str) -> str:
    prefix = dialogue_id.split("_", 1)[0]
    if prefix not in SPLITS:
        raise SchemaError(f"id prefix {prefix!r} is not one of {SPLITS}",
                          dialogue_id=dialogue_id, field_path="id")
    return prefix


def _parse_round_scene(raw: object, dialogue_id: str, round_index: int | None,
                       grammar: SceneGrammar) -> Scene:
    if not isinstance(raw, str):
        field_path = "source_scene" if round_index is None else f"turns[{round_index}].scene_after"
        raise SchemaError(f"scene string must be text, got {type(raw).__name__}",
                          dialogue_id=dialogue_id, field_path=field_path)
    try:
        return parse_scene(raw, grammar)
    except MalformedSceneString as exc:
        raise SceneParseError(exc, dialogue_id=dialogue_id, round_index=round_index) from exc


def load_corpus(path: str | Path, splits: Iterable[str] | None = None,
                schema: SchemaConfig = DEFAULT_SCHEMA,
                grammar: SceneGrammar = DEFAULT_GRAMMAR,
                metric: SimilarityMetric = DEFAULT_METRIC) -> Corpus:
    """Load and structurally validate a dialogue JSON file.

    Actions are derived by diffing consecutive round scenes, and the final
    score is computed with the configured metric, so both are consistent by
    construction. Semantic invariants of programmatically built corpora are
    checked separately by validate().
    """
    wanted = set(SPLITS if splits is None else splits)
    unknown = wanted - set(SPLITS)
    if unknown:
        raise ValueError(f"unknown splits: {sorted(unknown)}")

    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise SchemaError("top level must be a JSON object", field_path="$")
    if schema.data_wrapper in payload and isinstance(payload[schema.data_wrapper], dict):
        payload = payload[schema.data_wrapper]

    dialogues: list[Dialogue] = []
    for dialogue_id, body in payload.items():
        split = _split_of(dialogue_id)
        if split not in wanted:
            continue
        if not isinstance(body, dict):
            raise SchemaError("dialogue body must be an object", dialogue_id=dialogue_id, field_path="$")
        if schema.source_scene not in body:
            raise SchemaError(f"missing field {schema.source_scene!r}",
                              dialogue_id=dialogue_id, field_path=schema.source_scene)
        source = _parse_round_scene(body[schema.source_scene], dialogue_id, None, grammar)
        turns = body.get(schema.turns)
        if not isinstance(turns, list):
            raise SchemaError(f"missing or non-list field {schema.turns!r}",
                              dialogue_id=dialogue_id, field_path=schema.turns)

        rounds: list[Round] = []
        prev_scene = EMPTY_SCENE
        for i, turn in enumerate(turns):
            if not isinstance(turn, dict):
                raise SchemaError("turn must be an object", dialogue_id=dialogue_id,
                                  field_path=f"turns[{i}]")
            if schema.teller_text not in turn or not isinstance(turn[schema.teller_text], str):
                raise SchemaError(f"missing or non-text field {schema.teller_text!r}",
                                  dialogue_id=dialogue_id, field_path=f"turns[{i}].{schema.teller_text}")
            teller = Utterance(Speaker.TELLER, turn[schema.teller_text], i)
            drawer_raw = turn.get(schema.drawer_text)
            if drawer_raw is not None and not isinstance(drawer_raw, str):
                raise SchemaError(f"field {schema.drawer_text!r} must be text",
                                  dialogue_id=dialogue_id, field_path=f"turns[{i}].{schema.drawer_text}")
            # A missing or empty drawer message marks a truncated final round.
            drawer = Utterance(Speaker.DRAWER, drawer_raw, i) if drawer_raw else None
            if schema.scene_after not in turn:
                raise SchemaError(f"missing field {schema.scene_after!r}",
                                  dialogue_id=dialogue_id, field_path=f"turns[{i}].{schema.scene_after}")
            scene_after = _parse_round_scene(turn[schema.scene_after], dialogue_id, i, grammar)
            peek = turn.get(schema.peek_flag, False)
            if not isinstance(peek, bool):
                raise SchemaError(f"field {schema.peek_flag!r} must be boolean",
                                  dialogue_id=dialogue_id, field_path=f"turns[{i}].{schema.peek_flag}")
            actions = tuple(diff_scenes(prev_scene, scene_after))
            rounds.append(Round(index=i, teller_msg=teller, drawer_msg=drawer,
                                scene_after=scene_after, actions=actions, is_peek_round=peek))
            prev_scene = scene_after

        final_scene = rounds[-1].scene_after if rounds else EMPTY_SCENE
        final_score = scene_similarity(source, final_scene, metric) if len(source) else 0.0
        dialogues.append(Dialogue(id=dialogue_id, split=split, source_scene=source,
                                  rounds=tuple(rounds), final_score=final_score))
    return Corpus(tuple(dialogues))


@dataclass(frozen=True)
class RoundRecord:
    dialogue_id: str
    round_index: int
    n_actions: int
    score: float
    score_diff: float
    is_peek: bool
    before_peek: bool


ROUND_TABLE_COLUMNS = ("dialogue_id", "round_index", "n_actions", "score",
                       "score_diff", "is_peek", "before_peek")


def round_table(corpus: Corpus, metric: SimilarityMetric = DEFAULT_METRIC,
                until_peek_inclusive: bool = False) -> list[RoundRecord]:
    """Per-round scores and score differences.

    The pre-game score is defined as 0 (empty reconstruction), so score_diff
    telescopes to the final score. before_peek is strictly-before by default;
    set until_peek_inclusive to count the peek round itself. Rounds of
    dialogues without a peek are all before_peek.
    """
    records: list[RoundRecord] = []
    for dialogue in corpus:
        peek = None
        for round_ in dialogue.rounds:
            if round_.is_peek_round:
                peek = round_.index
                break
        prev_score = 0.0
        for round_ in dialogue.rounds:
            score = scene_similarity(dialogue.source_scene, round_.scene_after, metric) \
                if len(dialogue.source_scene) else 0.0
            if peek is None:
                before = True
            elif until_peek_inclusive:
                before = round_.index <= peek
            else:
                before = round_.index < peek
            records.append(RoundRecord(
                dialogue_id=dialogue.id,
                round_index=round_.index,
                n_actions=count_actions(round_.actions).total,
                score=score,
                score_diff=score - prev_score,
                is_peek=round_.is_peek_round,
                before_peek=before,
            ))
            prev_score = score
    return records


def write_round_table(records: list[RoundRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(ROUND_TABLE_COLUMNS) + "\n")
        for r in records:
            fh.write("\t".join([r.dialogue_id, str(r.round_index), str(r.n_actions),
                                repr(r.score), repr(r.score_diff),
                                str(int(r.is_peek)), str(int(r.before_peek))]) + "\n")


@dataclass(frozen=True)
class Violation:
    dialogue_id: str
    round_index: int | None
    field: str
    message: str

    def __str__(self) -> str:
        where = self.dialogue_id if self.round_index is None else f"{self.dialogue_id}[{self.round_index}]"
        return f"{where}.{self.field}: {self.message}"


def validate(corpus: Corpus, metric: SimilarityMetric = DEFAULT_METRIC) -> list[Violation]:
    """Check corpus invariants; an empty report means valid."""
    report: list[Violation] = []
    for dialogue in corpus:
        if dialogue.split not in SPLITS:
            report.append(Violation(dialogue.id, None, "split", f"unknown split {dialogue.split!r}"))
        if not 6 <= len(dialogue.source_scene) <= 17:
            report.append(Violation(dialogue.id, None, "source_scene",
                                    f"{len(dialogue.source_scene)} cliparts, expected 6-17"))
        indices = [r.index for r in dialogue.rounds]
        if indices != sorted(set(indices)):
            report.append(Violation(dialogue.id, None, "rounds", f"round indices not strictly ordered: {indices}"))
        n_peek = sum(1 for r in dialogue.rounds if r.is_peek_round)
        if n_peek > 1:
            report.append(Violation(dialogue.id, None, "rounds", f"{n_peek} peek rounds, expected at most 1"))

        prev_scene = EMPTY_SCENE
        for round_ in dialogue.rounds:
            if round_.teller_msg.speaker is not Speaker.TELLER:
                report.append(Violation(dialogue.id, round_.index, "teller_msg", "wrong speaker"))
            if not round_.teller_msg.text.strip():
                report.append(Violation(dialogue.id, round_.index, "teller_msg", "empty text"))
            if round_.teller_msg.round_index != round_.index:
                report.append(Violation(dialogue.id, round_.index, "teller_msg", "round_index mismatch"))
            if round_.drawer_msg is not None:
                if round_.drawer_msg.speaker is not Speaker.DRAWER:
                    report.append(Violation(dialogue.id, round_.index, "drawer_msg", "wrong speaker"))
                if not round_.drawer_msg.text.strip():
                    report.append(Violation(dialogue.id, round_.index, "drawer_msg", "empty text"))
                if round_.drawer_msg.round_index != round_.index:
                    report.append(Violation(dialogue.id, round_.index, "drawer_msg", "round_index mismatch"))
            elif round_.index != dialogue.rounds[-1].index:
                report.append(Violation(dialogue.id, round_.index, "drawer_msg",
                                        "missing drawer message in a non-final round"))
            expected = diff_scenes(prev_scene, round_.scene_after)
            if set(round_.actions) != set(expected):
                stated = {(a.kind.value, a.object_key) for a in round_.actions}
                wanted = {(a.kind.value, a.object_key) for a in expected}
                detail = sorted(stated ^ wanted)
                report.append(Violation(dialogue.id, round_.index, "actions",
                                        f"inconsistent with scene diff: {detail}"))
            elif not scenes_equal(replay_actions(prev_scene, round_.actions), round_.scene_after):
                report.append(Violation(dialogue.id, round_.index, "actions",
                                        "replay does not reproduce scene_after"))
            prev_scene = round_.scene_after

        if len(dialogue.source_scene):
            final_scene = dialogue.rounds[-1].scene_after if dialogue.rounds else EMPTY_SCENE
            expected_score = scene_similarity(dialogue.source_scene, final_scene, metric)
            if abs(expected_score - dialogue.final_score) > 1e-9:
                report.append(Violation(dialogue.id, None, "final_score",
                                        f"{dialogue.final_score!r} != computed {expected_score!r}"))
    return report


def corpus_summary(corpus: Corpus) -> dict:
    """Split-level descriptive statistics of the loaded corpus."""
    per_split: dict[str, dict] = {}
    teller_vocab: set[str] = set()
    drawer_vocab: set[str] = set()
    for split in SPLITS:
        dialogues = corpus.by_split(split)
        if not dialogues:
            continue
        n_rounds = sum(len(d.rounds) for d in dialogues)
        with_peek = [d for d in dialogues if any(r.is_peek_round for r in d.rounds)]
        teller_lens: list[int] = []
        drawer_lens: list[int] = []
        before_peek_scores: list[float] = []
        for d in dialogues:
            peek = next((r.index for r in d.rounds if r.is_peek_round), None)
            for r in d.rounds:
                teller_lens.append(len(r.teller_msg.tokens))
                teller_vocab.update(r.teller_msg.tokens)
                if r.drawer_msg is not None:
                    drawer_lens.append(len(r.drawer_msg.tokens))
                    drawer_vocab.update(r.drawer_msg.tokens)
            if peek is not None and peek > 0 and len(d.source_scene):
                before_peek_scores.append(
                    scene_similarity(d.source_scene, d.rounds[peek - 1].scene_after))
        per_split[split] = {
            "dialogues": len(dialogues),
            "with_peek": len(with_peek),
            "avg_final_score": sum(d.final_score for d in dialogues) / len(dialogues),
            "avg_score_before_peek": (sum(before_peek_scores) / len(before_peek_scores)
                                      if before_peek_scores else None),
            "avg_rounds_per_dialogue": n_rounds / len(dialogues),
            "avg_utterance_len_teller": sum(teller_lens) / len(teller_lens) if teller_lens else 0.0,
            "avg_utterance_len_drawer": sum(drawer_lens) / len(drawer_lens) if drawer_lens else 0.0,
        }
    return {
        "splits": per_split,
        "vocab_size_teller": len(teller_vocab),
        "vocab_size_drawer": len(drawer_vocab),
    }
