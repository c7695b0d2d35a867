"""Corpus statistics, distributional tables, round dynamics, significance tests.

Figure-feeding outputs are plain tables (rank lists, bigram counts, token
frequencies, histograms) so they stay deterministic and diffable; rendering
is left to the CLI.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotation import Label, UtteranceType
from .corpus import Corpus, RoundRecord, round_table
from .errors import EmptySample

UtteranceLabels = Mapping[tuple[str, int], Label]


# ---------------------------------------------------------------------------
# Permutation test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PermutationTestResult:
    p_value: float
    statistic: float  # observed mean(a) - mean(b)
    exact: bool
    n_resamples: int

    def __float__(self) -> float:
        return self.p_value


def permutation_test(sample_a: Sequence[float], sample_b: Sequence[float],
                     n_resamples: int = 9999, seed: int = 0) -> PermutationTestResult:
    """Two-sided permutation test for the difference of independent means.

    Enumerates all group assignments exactly when their number does not
    exceed n_resamples; otherwise draws random reassignments and reports the
    add-one estimate p = (1 + extreme) / (1 + n_resamples), which never
    returns 0. Deterministic given the seed, independent of any internal
    batching.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise EmptySample("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    n_a, n = a.size, pooled.size
    observed = float(a.mean() - b.mean())
    # |mean_a - mean_b| is a monotone function of the group-a sum, which is
    # what the resampling actually computes.
    total = pooled.sum()

    def diff_from_sum(sum_a: np.ndarray) -> np.ndarray:
        return sum_a / n_a - (total - sum_a) / (n - n_a)

    threshold = abs(observed) - 1e-12 * max(1.0, abs(observed))
    n_splits = math.comb(n, n_a)
    if n_splits <= n_resamples:
        sums = np.fromiter((pooled[list(idx)].sum() for idx in combinations(range(n), n_a)),
                           dtype=np.float64, count=n_splits)
        extreme = int(np.sum(np.abs(diff_from_sum(sums)) >= threshold))
        return PermutationTestResult(p_value=extreme / n_splits, statistic=observed,
                                     exact=True, n_resamples=n_splits)

    rng = np.random.default_rng(seed)
    extreme = 0
    remaining = n_resamples
    while remaining > 0:
        chunk = min(remaining, 2000)
        keys = rng.random((chunk, n))
        take = np.argsort(keys, axis=1)[:, :n_a]
        sums = pooled[take].sum(axis=1)
        extreme += int(np.sum(np.abs(diff_from_sum(sums)) >= threshold))
        remaining -= chunk
    return PermutationTestResult(p_value=(1 + extreme) / (1 + n_resamples), statistic=observed,
                                 exact=False, n_resamples=n_resamples)


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

def _icr_positions(labels: UtteranceLabels) -> set[tuple[str, int]]:
    return {pos for pos, label in labels.items() if label is Label.ICR}


def _scope_stats(n_dialogues: int, rounds: int, icrs_per_dialogue: list[int]) -> dict:
    n_icr = sum(icrs_per_dialogue)
    mean = n_icr / n_dialogues if n_dialogues else 0.0
    if n_dialogues:
        variance = sum((k - mean) ** 2 for k in icrs_per_dialogue) / n_dialogues
    else:
        variance = 0.0
    return {
        "dialogues": n_dialogues,
        "rounds": rounds,
        "icr_utterances": n_icr,
        "mean_icrs_per_dialogue": mean,
        "std_icrs_per_dialogue": math.sqrt(variance),
    }


def descriptive_stats(corpus: Corpus, labels: UtteranceLabels,
                      until_peek_inclusive: bool = False) -> dict:
    """Annotation-level statistics for the scopes all / with-iCRs / until-peek.

    Percentages are over the rounds in scope. The until-peek scope keeps
    rounds strictly before the peek by default (the peek round itself counts
    only when until_peek_inclusive is set); dialogues without a peek keep all
    their rounds. Standard deviations are population (ddof 0).
    """
    icr = _icr_positions(labels)
    all_rows: list[tuple[str, int, bool]] = []  # (dialogue, round, before_peek)
    for dialogue in corpus:
        peek = next((r.index for r in dialogue.rounds if r.is_peek_round), None)
        for r in dialogue.rounds:
            if peek is None:
                before = True
            elif until_peek_inclusive:
                before = r.index <= peek
            else:
                before = r.index < peek
            all_rows.append((dialogue.id, r.index, before))

    def build(scope_rows, dialogue_ids) -> dict:
        per_dialogue = {d: 0 for d in dialogue_ids}
        for did, idx, _ in scope_rows:
            if (did, idx) in icr:
                per_dialogue[did] += 1
        stats = _scope_stats(len(dialogue_ids), len(scope_rows), list(per_dialogue.values()))
        stats["pct_icr_utterances"] = (100.0 * stats["icr_utterances"] / len(scope_rows)) if scope_rows else 0.0
        return stats

    dialogue_ids = [d.id for d in corpus]
    with_icr_ids = sorted({did for did, _ in icr})
    scopes = {
        "all": build(all_rows, dialogue_ids),
        "with_icrs": build([row for row in all_rows if row[0] in set(with_icr_ids)], with_icr_ids),
        "until_peek": build([row for row in all_rows if row[2]], dialogue_ids),
    }
    scopes["all"]["pct_dialogues_without_icrs"] = (
        100.0 * (len(dialogue_ids) - len(with_icr_ids)) / len(dialogue_ids) if dialogue_ids else 0.0)
    return scopes


def rank_frequency(labels: UtteranceLabels, types: Sequence[UtteranceType]) -> dict:
    """iCR types ranked by occurrence count (ties by first occurrence)."""
    icr = _icr_positions(labels)
    entries = []
    for t in types:
        count = sum(1 for pos in t.occurrences if pos in icr)
        if count:
            entries.append((t.form, count, t.type_id))
    entries.sort(key=lambda e: (-e[1], e[2]))
    hapax = sum(1 for _, count, _ in entries if count == 1)
    return {
        "entries": [(form, count) for form, count, _ in entries],
        "n_icr_types": len(entries),
        "hapax_count": hapax,
        "hapax_share": hapax / len(entries) if entries else 0.0,
    }


def _is_punctuation_token(token: str) -> bool:
    """True when every character is Unicode punctuation or an ASCII symbol."""
    if not token:
        return True
    for ch in token:
        category = unicodedata.category(ch)
        if category.startswith("P"):
            continue
        if ch in "+<=>|~^$`":
            continue
        return False
    return True


SHORT_FORM_BUCKET = ("<short>", "<short>")
_LEADING_ACKS = frozenset({"ok", "okay"})


def initial_bigram(text: str) -> tuple[str, str]:
    """First two tokens after dropping punctuation tokens and leading ok/okay."""
    tokens = [t for t in text.split() if not _is_punctuation_token(t)]
    start = 0
    while start < len(tokens) and tokens[start] in _LEADING_ACKS:
        start += 1
    tokens = tokens[start:]
    if len(tokens) < 2:
        return SHORT_FORM_BUCKET
    return (tokens[0], tokens[1])


def initial_bigrams(labels: UtteranceLabels, corpus: Corpus) -> Counter:
    counts: Counter = Counter()
    icr = _icr_positions(labels)
    for dialogue, round_, utterance in corpus.drawer_utterances():
        if (dialogue.id, round_.index) in icr:
            counts[initial_bigram(utterance.text)] += 1
    return counts


def vocab_partition(labels: UtteranceLabels, corpus: Corpus) -> dict:
    """Token frequency tables for iCR vs non-iCR drawer utterances."""
    icr = _icr_positions(labels)
    icr_freq: Counter = Counter()
    other_freq: Counter = Counter()
    for dialogue, round_, utterance in corpus.drawer_utterances():
        target = icr_freq if (dialogue.id, round_.index) in icr else other_freq
        target.update(utterance.tokens)
    vocab = set(icr_freq) | set(other_freq)
    return {
        "icr_tokens": icr_freq,
        "other_tokens": other_freq,
        "drawer_vocab_size": len(vocab),
        "icr_vocab_size": len(set(icr_freq)),
    }


# ---------------------------------------------------------------------------
# Round dynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicsGroups:
    """Group flags for one round; a round can be both iCR and post-iCR."""

    dialogue_id: str
    round_index: int
    is_icr_round: bool | None  # None when the round has no labeled drawer message
    is_post_icr_round: bool
    in_with_icr_subset: bool
    before_peek: bool


def assign_groups(corpus: Corpus, labels: UtteranceLabels,
                  until_peek_inclusive: bool = False) -> list[DynamicsGroups]:
    icr = _icr_positions(labels)
    with_icr_dialogues = {did for did, _ in icr}
    out: list[DynamicsGroups] = []
    for dialogue in corpus:
        peek = next((r.index for r in dialogue.rounds if r.is_peek_round), None)
        for r in dialogue.rounds:
            position = (dialogue.id, r.index)
            if peek is None:
                before = True
            elif until_peek_inclusive:
                before = r.index <= peek
            else:
                before = r.index < peek
            out.append(DynamicsGroups(
                dialogue_id=dialogue.id,
                round_index=r.index,
                is_icr_round=(position in icr) if position in labels else None,
                is_post_icr_round=(dialogue.id, r.index - 1) in icr,
                in_with_icr_subset=dialogue.id in with_icr_dialogues,
                before_peek=before,
            ))
    return out


_COMPARISONS = (("icr", "not_icr"), ("post_icr", "not_post_icr"))


def round_dynamics(corpus: Corpus, labels: UtteranceLabels,
                   groups: list[DynamicsGroups] | None = None,
                   records: list[RoundRecord] | None = None,
                   n_resamples: int = 9999, seed: int = 0) -> dict:
    """Group means of actions-per-round and score difference, with the
    permutation-test p-values for each adjacent group comparison.

    In the with-iCRs scope every group (including the complements) is
    restricted to dialogues containing at least one iCR; the output metadata
    records that reading.
    """
    if groups is None:
        groups = assign_groups(corpus, labels)
    if records is None:
        records = round_table(corpus)
    by_position = {(rec.dialogue_id, rec.round_index): rec for rec in records}

    def collect(scope: str) -> dict[str, dict[str, list[float]]]:
        samples: dict[str, dict[str, list[float]]] = {
            name: {"actions": [], "score_diff": []}
            for name in ("icr", "not_icr", "post_icr", "not_post_icr")
        }
        for g in groups:
            if scope == "with_icrs" and not g.in_with_icr_subset:
                continue
            rec = by_position[(g.dialogue_id, g.round_index)]
            buckets = []
            if g.is_icr_round is True:
                buckets.append("icr")
            elif g.is_icr_round is False:
                buckets.append("not_icr")
            buckets.append("post_icr" if g.is_post_icr_round else "not_post_icr")
            for bucket in buckets:
                samples[bucket]["actions"].append(float(rec.n_actions))
                samples[bucket]["score_diff"].append(rec.score_diff)
        return samples

    result: dict = {"metadata": {
        "with_icrs_scope": "all groups restricted to dialogues containing at least one iCR",
        "n_resamples": n_resamples,
    }}
    for scope_index, scope in enumerate(("all", "with_icrs")):
        samples = collect(scope)
        scope_out: dict = {}
        for group, measures in samples.items():
            scope_out[group] = {
                measure: (sum(values) / len(values) if values else None)
                for measure, values in measures.items()
            }
            scope_out[group]["n"] = len(measures["actions"])
        for measure in ("actions", "score_diff"):
            for pair_index, (g1, g2) in enumerate(_COMPARISONS):
                s1, s2 = samples[g1][measure], samples[g2][measure]
                key = f"p_{g1}_vs_{g2}_{measure}"
                if not s1 or not s2:
                    scope_out[key] = None
                    continue
                test_seed = seed + 1000 * scope_index + 10 * pair_index + (1 if measure == "actions" else 2)
                scope_out[key] = permutation_test(s1, s2, n_resamples=n_resamples,
                                                  seed=test_seed).p_value
        result[scope] = scope_out
    return result


# ---------------------------------------------------------------------------
# Histograms and split overlap
# ---------------------------------------------------------------------------

def histograms(corpus: Corpus, labels: UtteranceLabels) -> dict:
    """iCRs by round index, iCRs per dialogue, and iCRs vs dialogue length."""
    icr = _icr_positions(labels)
    by_round: Counter = Counter()
    per_dialogue: Counter = Counter()
    by_length: Counter = Counter()
    for dialogue in corpus:
        k = sum(1 for r in dialogue.rounds if (dialogue.id, r.index) in icr)
        per_dialogue[k] += 1
        by_length[(len(dialogue.rounds), k)] += 1
        for r in dialogue.rounds:
            if (dialogue.id, r.index) in icr:
                by_round[r.index] += 1
    return {"icrs_by_round": by_round, "icrs_per_dialogue": per_dialogue,
            "icrs_by_dialogue_length": by_length}


def split_overlap(labels: UtteranceLabels, corpus: Corpus) -> dict:
    """Type- and utterance-level overlap of val/test iCR forms with train."""
    icr = _icr_positions(labels)
    forms: dict[str, Counter] = {"train": Counter(), "val": Counter(), "test": Counter()}
    for dialogue, round_, utterance in corpus.drawer_utterances():
        if (dialogue.id, round_.index) in icr:
            forms[dialogue.split][utterance.text] += 1
    train_forms = set(forms["train"])
    out: dict = {}
    for split in ("val", "test"):
        split_counter = forms[split]
        types = set(split_counter)
        shared_types = types & train_forms
        utterances = sum(split_counter.values())
        shared_utterances = sum(split_counter[f] for f in shared_types)
        out[split] = {
            "icr_types": len(types),
            "shared_types": len(shared_types),
            "pct_types": 100.0 * len(shared_types) / len(types) if types else 0.0,
            "icr_utterances": utterances,
            "shared_utterances": shared_utterances,
            "pct_utterances": 100.0 * shared_utterances / utterances if utterances else 0.0,
        }
    return out
