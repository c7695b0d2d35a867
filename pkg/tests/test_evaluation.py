import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icr.errors import NoPositives
from icr.evaluation import (
    average_precision,
    curves,
    evaluate,
    macro_f1,
    per_round_ap,
    random_baseline,
    results_table,
)


def brute_force_ap(scores, labels):
    """All-thresholds sweep with explicit set comparisons at each step."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = labels.sum()
    thresholds = sorted(set(scores.tolist()), reverse=True)
    ap = 0.0
    prev_recall = 0.0
    for t in thresholds:
        predicted = scores >= t
        tp = int((predicted & (labels == 1)).sum())
        precision = tp / predicted.sum()
        recall = tp / n_pos
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def test_ap_perfect_ranking():
    assert average_precision([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0


def test_ap_constant_scores_equal_prevalence_exactly():
    labels = [1, 0, 0, 0, 1, 0, 0, 0, 0, 0]
    assert average_precision([0.5] * 10, labels) == 0.2


def test_ap_hand_example():
    ap = average_precision([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0])
    assert ap == pytest.approx(5 / 6, abs=1e-12)


def test_ap_requires_positives():
    with pytest.raises(NoPositives):
        average_precision([0.1, 0.2], [0, 0])


def test_ap_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(400):
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, size=n)
        if labels.sum() == 0:
            labels[int(rng.integers(0, n))] = 1
        # mix continuous and heavily tied score distributions
        if rng.random() < 0.5:
            scores = rng.random(n)
        else:
            scores = rng.integers(0, 4, size=n).astype(float) / 3
        assert average_precision(scores, labels) == pytest.approx(
            brute_force_ap(scores, labels), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ap_invariant_under_monotone_transforms(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 40))
    labels = rng.integers(0, 2, size=n)
    if labels.sum() == 0:
        labels[0] = 1
    scores = rng.random(n)
    base = average_precision(scores, labels)
    assert average_precision(3.0 * scores + 7.0, labels) == pytest.approx(base, abs=1e-12)
    assert average_precision(np.exp(scores), labels) == pytest.approx(base, abs=1e-12)
    assert average_precision(np.tanh(scores), labels) == pytest.approx(base, abs=1e-12)


def test_macro_f1_perfect_and_fixture():
    assert macro_f1([0.9, 0.9, 0.1, 0.1], [1, 1, 0, 0]) == 1.0
    # confusion TP 5, FP 5, FN 5, TN 85
    scores = [0.9] * 5 + [0.9] * 5 + [0.1] * 5 + [0.1] * 85
    labels = [1] * 5 + [0] * 5 + [1] * 5 + [0] * 85
    assert macro_f1(scores, labels) == pytest.approx((0.5 + 17 / 18) / 2, abs=1e-12)


def test_macro_f1_class_swap_invariance():
    # Relabeling which class is "positive" (and flipping predictions to
    # match) permutes the two per-class F1 terms, leaving the mean unchanged.
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(4, 60))
        labels = rng.integers(0, 2, size=n)
        scores = rng.random(n)
        flipped_scores = np.where(scores >= 0.5, 0.0, 1.0)
        assert macro_f1(scores, labels) == pytest.approx(
            macro_f1(flipped_scores, 1 - labels), abs=1e-12)


def test_macro_f1_empty_empty_class_convention():
    # no true positives and no predicted positives: positive-class F1 is 1
    assert macro_f1([0.1, 0.2, 0.3], [0, 0, 0]) == 1.0


def test_curves_perfect_and_constant():
    pr, roc = curves([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert (0.0, 1.0) in roc or any(f == 0.0 and t == 1.0 for f, t in roc)
    pr_c, roc_c = curves([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0])
    assert roc_c == [(0.0, 0.0), (1.0, 1.0)]
    assert pr_c == [(0.0, 1.0), (1.0, 0.5)]


def test_curves_match_brute_force_sweep():
    rng = np.random.default_rng(2)
    scores = rng.integers(0, 5, size=30).astype(float)
    labels = rng.integers(0, 2, size=30)
    labels[0] = 1
    pr, roc = curves(scores, labels)
    n_pos, n_neg = labels.sum(), (1 - labels).sum()
    expected_pr = [(0.0, 1.0)]
    expected_roc = [(0.0, 0.0)]
    for t in sorted(set(scores.tolist()), reverse=True):
        predicted = scores >= t
        tp = int((predicted & (labels == 1)).sum())
        fp = int((predicted & (labels == 0)).sum())
        expected_pr.append((tp / n_pos, tp / (tp + fp)))
        expected_roc.append((fp / n_neg, tp / n_pos))
    assert pr == pytest.approx(expected_pr)
    assert roc == pytest.approx(expected_roc)


def test_per_round_ap():
    scores = [0.9, 0.1, 0.8, 0.3]
    labels = [1, 0, 1, 0]
    rounds = [0, 0, 0, 0]
    assert per_round_ap(scores, labels, rounds) == {0: average_precision(scores, labels)}
    rounds = [0, 0, 1, 1]
    out = per_round_ap(scores, labels, rounds)
    assert out[0] == 1.0 and out[1] == 1.0
    # rounds without positives are absent
    out = per_round_ap([0.9, 0.1, 0.2], [1, 0, 0], [0, 1, 1])
    assert 1 not in out and out[0] == 1.0


def test_random_baseline_matches_expected_half():
    rng = np.random.default_rng(9)
    labels = (rng.random(7721) < 0.1128).astype(int)
    ap, mf1 = random_baseline(labels, n_sims=300, seed=4)
    assert ap == pytest.approx(labels.mean(), abs=1e-12)
    # at this size and prevalence the expected macro-F1 sits near .503
    assert mf1 == pytest.approx(0.503, abs=0.02)


def test_results_table_renders_missing_cells():
    cells = {
        ("random", "val", "task1"): {"ap": 0.117, "mf1": 0.489},
        ("model", "test", "task2"): {"ap": 0.988, "mf1": 0.968},
    }
    table = results_table(cells)
    assert "random" in table and "model" in table
    assert "0.988" in table and "-" in table


def test_evaluate_report_roundtrip():
    report = evaluate([0.9, 0.1, 0.8, 0.3], [1, 0, 1, 0], round_indices=[0, 0, 1, 1], split="val")
    d = report.as_dict()
    assert d["ap"] == 1.0
    assert d["split"] == "val"
    assert d["per_round_ap"] == {"0": 1.0, "1": 1.0}
