"""Utterance-type collapsing, binary labeling sessions, agreement, projection.

Drawer utterances are collapsed into types by exact string equality on the
already-preprocessed text (no case folding: the corpus is spell-checked and
lowercased upstream, and further merging could conflate forms annotators saw
as distinct). Label files are JSON lines, one record per decision, written
atomically (temp file plus rename) and exported in type-id order.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

from .corpus import Corpus
from .errors import DegenerateMarginals, LabelFileError, UnlabeledType


class Label(Enum):
    ICR = "iCR"
    NOT_ICR = "notICR"


@dataclass(frozen=True)
class UtteranceType:
    """One collapsed drawer-utterance form and everywhere it occurs."""

    type_id: int
    form: str
    occurrences: tuple[tuple[str, int], ...]  # (dialogue id, round index)
    context_window: tuple[str | None, str | None] | None = None  # singletons only

    @property
    def is_singleton(self) -> bool:
        return len(self.occurrences) == 1


def collapse_types(corpus: Corpus) -> list[UtteranceType]:
    """Partition all drawer utterances into types, ordered by first occurrence.

    Singleton types carry a one-utterance context window: the teller utterance
    of the same round and the teller utterance of the following round.
    """
    order: list[str] = []
    occurrences: dict[str, list[tuple[str, int]]] = {}
    contexts: dict[tuple[str, int], tuple[str | None, str | None]] = {}
    for dialogue, round_, utterance in corpus.drawer_utterances():
        form = utterance.text
        if form not in occurrences:
            order.append(form)
            occurrences[form] = []
        occurrences[form].append((dialogue.id, round_.index))
        following = None
        for r in dialogue.rounds:
            if r.index == round_.index + 1:
                following = r.teller_msg.text
                break
        contexts[(dialogue.id, round_.index)] = (round_.teller_msg.text, following)

    types: list[UtteranceType] = []
    for type_id, form in enumerate(order):
        occ = tuple(occurrences[form])
        window = contexts[occ[0]] if len(occ) == 1 else None
        types.append(UtteranceType(type_id=type_id, form=form, occurrences=occ, context_window=window))
    return types


@dataclass
class LabelSet:
    annotator_id: str
    labels: dict[int, Label] = field(default_factory=dict)
    timestamps: dict[int, str] = field(default_factory=dict)

    def set(self, type_id: int, label: Label, timestamp: str = "") -> None:
        self.labels[type_id] = label
        self.timestamps[type_id] = timestamp


def write_labels(labels: LabelSet, types: Sequence[UtteranceType], path: str | Path) -> None:
    """Atomic JSONL export, ordered by type_id."""
    path = Path(path)
    forms = {t.type_id: t.form for t in types}
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for type_id in sorted(labels.labels):
                record = {
                    "type_id": type_id,
                    "form": forms.get(type_id, ""),
                    "label": labels.labels[type_id].value,
                    "annotator_id": labels.annotator_id,
                    "timestamp": labels.timestamps.get(type_id, ""),
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_labels(path: str | Path) -> LabelSet:
    """Read a JSONL label file; any malformed line raises LabelFileError."""
    path = Path(path)
    labels = LabelSet(annotator_id="")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LabelFileError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            type_id = int(record["type_id"])
            label = Label(record["label"])
        except (ValueError, KeyError, TypeError) as exc:
            raise LabelFileError(f"{path}:{lineno}: corrupt record ({exc})") from exc
        if type_id in labels.labels:
            raise LabelFileError(f"{path}:{lineno}: duplicate type_id {type_id}")
        labels.labels[type_id] = label
        labels.timestamps[type_id] = str(record.get("timestamp", ""))
        if not labels.annotator_id:
            labels.annotator_id = str(record.get("annotator_id", ""))
    return labels


_PROMPT = "[i]CR / [n]ot / [s]kip / [q]uit > "


def label_session(types: Sequence[UtteranceType], label_file: str | Path, resume: bool = False,
                  annotator_id: str = "annotator",
                  input_fn: Callable[[str], str] = input,
                  print_fn: Callable[[str], None] = print,
                  clock_fn: Callable[[], str] | None = None) -> LabelSet:
    """Interactive terminal loop assigning binary labels to utterance types.

    Every decision is persisted immediately (atomic rewrite), so the session
    is resumable. A corrupt label file refuses to resume and is left intact.
    Skipped items stay unlabeled and keep blocking projection until resolved.
    """
    label_file = Path(label_file)
    if clock_fn is None:
        import datetime

        def clock_fn() -> str:
            return datetime.datetime.now(datetime.timezone.utc).isoformat()

    if resume and label_file.exists():
        labels = read_labels(label_file)  # raises LabelFileError on corruption
        labels.annotator_id = labels.annotator_id or annotator_id
    elif label_file.exists():
        raise LabelFileError(f"{label_file} exists; pass resume=True to continue it")
    else:
        labels = LabelSet(annotator_id=annotator_id)

    pending = [t for t in sorted(types, key=lambda t: t.type_id) if t.type_id not in labels.labels]
    print_fn(f"{len(types)} types, {len(labels.labels)} already labeled, {len(pending)} to go")
    skipped = 0
    for item in pending:
        print_fn("")
        print_fn(f"type {item.type_id} ({len(item.occurrences)} occurrence(s))")
        if item.is_singleton and item.context_window is not None:
            before, after = item.context_window
            print_fn(f"  teller before: {before!r}")
            print_fn(f"  >>> {item.form!r}")
            print_fn(f"  teller after:  {after!r}")
        else:
            print_fn(f"  >>> {item.form!r}")
        while True:
            answer = input_fn(_PROMPT).strip().lower()
            if answer in ("i", "icr"):
                labels.set(item.type_id, Label.ICR, clock_fn())
                break
            if answer in ("n", "not", "noticr"):
                labels.set(item.type_id, Label.NOT_ICR, clock_fn())
                break
            if answer in ("s", "skip"):
                skipped += 1
                break
            if answer in ("q", "quit"):
                write_labels(labels, types, label_file)
                print_fn(f"stopped: {len(labels.labels)} labeled, {skipped} skipped this session")
                return labels
            print_fn("please answer i, n, s, or q")
        write_labels(labels, types, label_file)

    n_icr = sum(1 for v in labels.labels.values() if v is Label.ICR)
    print_fn(f"done: {len(labels.labels)}/{len(types)} labeled "
             f"({n_icr} iCR, {len(labels.labels) - n_icr} notICR, {skipped} skipped)")
    return labels


def _check_same_inventory(a: LabelSet, b: LabelSet) -> list[int]:
    if set(a.labels) != set(b.labels):
        only_a = sorted(set(a.labels) - set(b.labels))[:5]
        only_b = sorted(set(b.labels) - set(a.labels))[:5]
        raise ValueError(f"label sets cover different inventories (e.g. only-a={only_a}, only-b={only_b})")
    return sorted(a.labels)


def cohen_kappa(a: LabelSet, b: LabelSet, weights: dict[int, int] | None = None) -> float:
    """Cohen's kappa between two label sets over the same inventory.

    weights (occurrence counts per type) switch the computation from the
    type level to the utterance level.
    """
    ids = _check_same_inventory(a, b)
    if not ids:
        raise ValueError("empty label sets")
    w = {i: 1 for i in ids} if weights is None else weights
    total = float(sum(w[i] for i in ids))
    observed = sum(w[i] for i in ids if a.labels[i] is b.labels[i]) / total
    p_a_icr = sum(w[i] for i in ids if a.labels[i] is Label.ICR) / total
    p_b_icr = sum(w[i] for i in ids if b.labels[i] is Label.ICR) / total
    expected = p_a_icr * p_b_icr + (1 - p_a_icr) * (1 - p_b_icr)
    if expected == 1.0:
        raise DegenerateMarginals("both annotators constant and identical; kappa undefined")
    return (observed - expected) / (1.0 - expected)


def disagreement_rate(a: LabelSet, b: LabelSet, weights: dict[int, int] | None = None) -> float:
    ids = _check_same_inventory(a, b)
    w = {i: 1 for i in ids} if weights is None else weights
    total = float(sum(w[i] for i in ids))
    return sum(w[i] for i in ids if a.labels[i] is not b.labels[i]) / total


def resolve(a: LabelSet, b: LabelSet, policy: str = "prefer_second") -> LabelSet:
    """Merge two annotators' labels; disagreements go to the preferred side."""
    ids = _check_same_inventory(a, b)
    if policy not in ("prefer_second", "prefer_first"):
        raise ValueError(f"unknown policy {policy!r}")
    preferred = b if policy == "prefer_second" else a
    out = LabelSet(annotator_id=f"resolved({policy}:{a.annotator_id},{b.annotator_id})")
    for i in ids:
        out.labels[i] = preferred.labels[i]
        out.timestamps[i] = preferred.timestamps.get(i, "")
    return out


def project_labels(final: LabelSet, types: Sequence[UtteranceType]) -> dict[tuple[str, int], Label]:
    """Per-utterance labels: every occurrence inherits its type's label."""
    missing = [t.type_id for t in types if t.type_id not in final.labels]
    if missing:
        raise UnlabeledType(missing)
    projected: dict[tuple[str, int], Label] = {}
    for t in types:
        label = final.labels[t.type_id]
        for position in t.occurrences:
            if position in projected:
                raise ValueError(f"utterance position {position} labeled twice")
            projected[position] = label
    return projected
