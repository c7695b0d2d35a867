"""Ranking and threshold metrics for the two binary classification tasks.

Average precision uses the step-sum over descending-score thresholds with
equal scores grouped into a single threshold step (no interpolation). The
macro-F1 convention for a class with no true and no predicted members is
F1 = 1 (a vacuously perfect class), documented here because the choice
matters for degenerate fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import NoPositives


def _as_arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError(f"scores and labels must be equal-length 1-d, got {s.shape} vs {y.shape}")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    return s, y


def _threshold_steps(scores: np.ndarray, labels: np.ndarray):
    """Cumulative tp/fp at each distinct descending score threshold."""
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y)
    fp = np.cumsum(1 - y)
    boundary = np.ones(len(s), dtype=bool)
    boundary[:-1] = s[:-1] != s[1:]
    return tp[boundary].astype(np.float64), fp[boundary].astype(np.float64)


def average_precision(scores, labels) -> float:
    """AP = sum over thresholds of (recall step) * precision, ties grouped."""
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise NoPositives("average precision needs at least one positive label")
    tp, fp = _threshold_steps(s, y)
    precision = tp / (tp + fp)
    recall = tp / n_pos
    recall_steps = np.diff(recall, prepend=0.0)
    return float(np.sum(recall_steps * precision))


def _f1(tp: int, fp: int, fn: int) -> float:
    if tp == 0 and fp == 0 and fn == 0:
        return 1.0  # no true and no predicted members: vacuously perfect
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def macro_f1(scores, labels, threshold: float = 0.5) -> float:
    """Unweighted mean of the two per-class F1 scores at a fixed threshold."""
    s, y = _as_arrays(scores, labels)
    pred = s >= threshold
    truth = y == 1
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    tn = int(np.sum(~pred & ~truth))
    positive_f1 = _f1(tp, fp, fn)
    negative_f1 = _f1(tn, fn, fp)  # negatives: tn are hits, fn are false "negatives class" calls
    return (positive_f1 + negative_f1) / 2.0


def curves(scores, labels) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """(PR points, ROC points) over all distinct thresholds.

    PR points are (recall, precision) prefixed with the (0, 1) anchor; ROC
    points are (fpr, tpr) prefixed with (0, 0). A constant scorer therefore
    yields exactly the two ROC diagonal endpoints.
    """
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0:
        raise NoPositives("curves need at least one positive label")
    tp, fp = _threshold_steps(s, y)
    precision = tp / (tp + fp)
    recall = tp / n_pos
    fpr = fp / n_neg if n_neg else np.zeros_like(fp)
    tpr = recall
    pr = [(0.0, 1.0)] + list(zip(recall.tolist(), precision.tolist()))
    roc = [(0.0, 0.0)] + list(zip(fpr.tolist(), tpr.tolist()))
    return pr, roc


def per_round_ap(scores, labels, round_indices) -> dict[int, float]:
    """AP within each round index; rounds without positives are absent."""
    s, y = _as_arrays(scores, labels)
    rounds = np.asarray(round_indices, dtype=np.int64)
    if rounds.shape != s.shape:
        raise ValueError("round_indices must align with scores")
    out: dict[int, float] = {}
    for r in sorted(set(rounds.tolist())):
        mask = rounds == r
        if y[mask].sum() == 0:
            continue
        out[r] = average_precision(s[mask], y[mask])
    return out


def random_baseline(labels, n_sims: int = 10_000, seed: int = 0) -> tuple[float, float]:
    """Analytic AP (the positive fraction) and simulated macro-F1 of a
    prevalence-calibrated Bernoulli scorer, averaged over seeded runs."""
    y = np.asarray(labels, dtype=np.int64)
    prevalence = float(y.mean())
    rng = np.random.default_rng(seed)
    mf1s = np.empty(n_sims)
    for i in range(n_sims):
        scores = (rng.random(len(y)) < prevalence).astype(np.float64)
        mf1s[i] = macro_f1(scores, y)
    return prevalence, float(mf1s.mean())


@dataclass
class EvalReport:
    ap: float
    macro_f1: float
    positive_fraction: float
    threshold: float = 0.5
    split: str = ""
    pr_curve: list[tuple[float, float]] = dataclass_field(default_factory=list)
    roc_curve: list[tuple[float, float]] = dataclass_field(default_factory=list)
    per_round_ap: dict[int, float] = dataclass_field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "ap": self.ap,
            "macro_f1": self.macro_f1,
            "positive_fraction": self.positive_fraction,
            "threshold": self.threshold,
            "split": self.split,
            "pr_curve": [list(p) for p in self.pr_curve],
            "roc_curve": [list(p) for p in self.roc_curve],
            "per_round_ap": {str(k): v for k, v in self.per_round_ap.items()},
        }


def evaluate(scores, labels, round_indices=None, split: str = "", threshold: float = 0.5) -> EvalReport:
    s, y = _as_arrays(scores, labels)
    pr, roc = curves(s, y)
    report = EvalReport(
        ap=average_precision(s, y),
        macro_f1=macro_f1(s, y, threshold),
        positive_fraction=float(y.mean()),
        threshold=threshold,
        split=split,
        pr_curve=pr,
        roc_curve=roc,
    )
    if round_indices is not None:
        report.per_round_ap = per_round_ap(s, y, round_indices)
    return report


SYSTEM_ORDER = ("random", "features", "log-reg", "model")
SPLIT_ORDER = ("val", "test")
TASK_ORDER = ("task1", "task2")


def results_table(cells: dict[tuple[str, str, str], dict]) -> str:
    """Aligned main-results table.

    cells maps (system, split, task) to {"ap": float, "mf1": float}; missing
    cells render as '-'. Systems/splits/tasks outside the canonical order are
    appended after it.
    """
    systems = [s for s in SYSTEM_ORDER if any(k[0] == s for k in cells)]
    systems += sorted({k[0] for k in cells} - set(systems))
    header = f"{'':>10} {'':>5} | {'T1 AP':>7} {'T1 mF1':>7} | {'T2 AP':>7} {'T2 mF1':>7}"
    lines = [header, "-" * len(header)]

    def fmt(system: str, split: str, task: str, key: str) -> str:
        cell = cells.get((system, split, task))
        if cell is None or cell.get(key) is None:
            return f"{'-':>7}"
        return f"{cell[key]:>7.3f}"

    for system in systems:
        for split in SPLIT_ORDER:
            if not any(k[:2] == (system, split) for k in cells):
                continue
            lines.append(
                f"{system:>10} {split:>5} | {fmt(system, split, 'task1', 'ap')} {fmt(system, split, 'task1', 'mf1')}"
                f" | {fmt(system, split, 'task2', 'ap')} {fmt(system, split, 'task2', 'mf1')}"
            )
    return "\n".join(lines)
