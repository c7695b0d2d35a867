"""Command-line entry point wiring every stage into reproducible commands.

Each subcommand writes its outputs plus a manifest (argument hash, package
versions, store provenance, seed) into the output directory. All randomness
flows from one --seed through named derived seeds per stage. Exit codes:
0 success, 1 validation or data failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .annotation import (
    Label,
    collapse_types,
    cohen_kappa,
    disagreement_rate,
    label_session,
    project_labels,
    read_labels,
    resolve,
    write_labels,
)
from .analysis import (
    descriptive_stats,
    histograms,
    initial_bigrams,
    rank_frequency,
    round_dynamics,
    split_overlap,
    vocab_partition,
)
from .corpus import corpus_summary, load_corpus, round_table, validate, write_round_table
from .datasets import (
    ContextFilter,
    Task,
    build_dataset,
    enumerate_inputs,
    featurize_all,
    load_content_words,
    read_datapoints,
    split_datapoints,
    teller_vocabulary,
    write_datapoints,
    write_features,
)
from .errors import IcrError
from .evaluation import evaluate as evaluate_scores
from .evaluation import random_baseline, results_table
from .models import (
    ClassifierConfig,
    StoreBundle,
    TrainConfig,
    ablate,
    init_model,
    load_checkpoint,
    predict,
    save_checkpoint,
    train,
)
from .seeding import derive_seed
from .stores import EmbeddingStore, IMAGE_DIM, TEXT_DIM, hash_embed, read_store, write_store
from .synthetic import GeneratorConfig, generate, labels_for_types

DEFAULT_OUT_DIR = os.environ.get("ICR_OUT_DIR", "icr-out")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True, ensure_ascii=False) + "\n",
                    encoding="utf-8")


def _write_manifest(args, command: str, extra: dict | None = None) -> None:
    out = _out_dir(args)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": command,
        "config": config,
        "config_hash": hashlib.sha256(json.dumps(config, sort_keys=True, default=str).encode()).hexdigest(),
        "versions": {"icr": __version__, "numpy": np.__version__,
                     "python": sys.version.split()[0]},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    _write_json(out / f"{command}.manifest.json", manifest)


def _load_projected_labels(corpus, labels_path):
    types = collapse_types(corpus)
    labels = read_labels(labels_path)
    return types, labels, project_labels(labels, types)


def _task_of(value: str) -> Task:
    return Task.TASK1 if str(value) in ("1", "task1") else Task.TASK2


def _store_paths(store_dir: Path, task: Task) -> dict[str, Path]:
    return {field: store_dir / f"{task.value}.{field}.icre" for field in ("ctx", "msg", "img")}


def _load_bundle(store_dir: Path, task: Task, cfg: ClassifierConfig) -> StoreBundle:
    paths = _store_paths(store_dir, task)
    bundle = StoreBundle()
    if cfg.use_context:
        bundle.ctx = read_store(paths["ctx"], expect_dim=cfg.text_dim)
    if cfg.use_message:
        bundle.msg = read_store(paths["msg"], expect_dim=cfg.text_dim)
    if cfg.use_image:
        bundle.img = read_store(paths["img"], expect_dim=cfg.image_dim)
    return bundle


def _write_tsv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(v) for v in row) + "\n")


def _plot_series(path: Path, series, title: str, xlabel: str, ylabel: str,
                 kind: str = "line") -> None:
    """Render one figure to SVG; needs the optional plots extra."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - environment dependent
        raise IcrError("SVG rendering needs matplotlib (pip install 'icr[plots]')") from exc
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [p[0] for p in series]
    ys = [p[1] for p in series]
    if kind == "bar":
        ax.bar(range(len(series)), ys)
        ax.set_xticks(range(len(series)))
        ax.set_xticklabels([str(x) for x in xs], rotation=90, fontsize=5)
    else:
        ax.plot(xs, ys, marker="o", markersize=2)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    out = _out_dir(args)
    cfg = GeneratorConfig(n_dialogues=args.n_dialogues, seed=derive_seed(args.seed, "synth"),
                          icr_rate=args.icr_rate, min_rounds=args.min_rounds,
                          max_rounds=args.max_rounds)
    syn = generate(cfg)
    corpus_path = out / "corpus.json"
    syn.write(corpus_path, out / "generator_manifest.json")
    corpus = load_corpus(corpus_path)
    types = collapse_types(corpus)
    labels = labels_for_types(types, syn.form_labels)
    write_labels(labels, types, out / "labels.jsonl")
    _write_manifest(args, "synth", {"dialogues": len(corpus), "types": len(types)})
    print(f"wrote {corpus_path} ({len(corpus)} dialogues, {len(types)} types)")
    return 0


def cmd_ingest(args) -> int:
    out = _out_dir(args)
    corpus = load_corpus(args.corpus, splits=args.splits)
    violations = validate(corpus)
    _write_json(out / "summary.json", corpus_summary(corpus))
    write_round_table(round_table(corpus), out / "round_table.tsv")
    _write_manifest(args, "ingest", {"dialogues": len(corpus), "violations": len(violations)})
    if violations:
        for v in violations:
            print(str(v), file=sys.stderr)
        return 1
    print(f"ingested {len(corpus)} dialogues; summary.json and round_table.tsv written")
    return 0


def cmd_validate(args) -> int:
    out = _out_dir(args)
    corpus = load_corpus(args.corpus, splits=args.splits)
    violations = validate(corpus)
    (out / "validation.txt").write_text("".join(f"{v}\n" for v in violations), encoding="utf-8")
    _write_manifest(args, "validate", {"violations": len(violations)})
    if violations:
        for v in violations:
            print(str(v), file=sys.stderr)
        return 1
    print("corpus valid")
    return 0


def cmd_collapse(args) -> int:
    out = _out_dir(args)
    corpus = load_corpus(args.corpus)
    types = collapse_types(corpus)
    with open(out / "types.jsonl", "w", encoding="utf-8") as fh:
        for t in types:
            record = {"type_id": t.type_id, "form": t.form, "occurrences": len(t.occurrences),
                      "is_singleton": t.is_singleton}
            if t.context_window is not None:
                record["context"] = list(t.context_window)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    n_singleton = sum(1 for t in types if t.is_singleton)
    _write_manifest(args, "collapse", {"types": len(types), "singletons": n_singleton})
    print(f"{len(types)} types ({n_singleton} singletons, "
          f"{100.0 * n_singleton / len(types):.2f}%)" if types else "0 types")
    return 0


def cmd_annotate(args) -> int:
    corpus = load_corpus(args.corpus)
    types = collapse_types(corpus)
    label_session(types, args.labels, resume=args.resume, annotator_id=args.annotator)
    return 0


def cmd_agree(args) -> int:
    out = _out_dir(args)
    corpus = load_corpus(args.corpus)
    types = collapse_types(corpus)
    a = read_labels(args.labels_a)
    b = read_labels(args.labels_b)
    weights = {t.type_id: len(t.occurrences) for t in types}
    report = {
        "kappa_types": cohen_kappa(a, b),
        "kappa_utterances": cohen_kappa(a, b, weights=weights),
        "disagreement_types": disagreement_rate(a, b),
        "disagreement_utterances": disagreement_rate(a, b, weights=weights),
        "n_types": len(a.labels),
    }
    _write_json(out / "agreement.json", report)
    _write_manifest(args, "agree")
    print(json.dumps(report, indent=1))
    return 0


def cmd_project(args) -> int:
    out = _out_dir(args)
    corpus = load_corpus(args.corpus)
    types = collapse_types(corpus)
    labels = read_labels(args.labels)
    if args.labels_b:
        labels = resolve(labels, read_labels(args.labels_b), policy=args.policy)
        write_labels(labels, types, out / "labels.resolved.jsonl")
    projected = project_labels(labels, types)
    rows = sorted(((did, idx, label.value) for (did, idx), label in projected.items()))
    _write_tsv(out / "utterance_labels.tsv", ["dialogue_id", "round_index", "label"], rows)
    n_icr = sum(1 for *_, v in rows if v == Label.ICR.value)
    _write_manifest(args, "project", {"utterances": len(rows), "icr": n_icr})
    print(f"{len(rows)} labeled utterances ({n_icr} iCR)")
    return 0


def _projected_from_args(args):
    corpus = load_corpus(args.corpus)
    types, labels, projected = _load_projected_labels(corpus, args.labels)
    return corpus, types, labels, projected


def cmd_stats(args) -> int:
    out = _out_dir(args)
    corpus, types, labels, projected = _projected_from_args(args)
    stats = descriptive_stats(corpus, projected, until_peek_inclusive=args.until_peek_inclusive)
    ranks = rank_frequency(projected, types)
    vocab = vocab_partition(projected, corpus)
    hists = histograms(corpus, projected)
    _write_json(out / "stats.json", {
        "descriptive": stats,
        "rank_frequency": {k: v for k, v in ranks.items() if k != "entries"},
        "vocabulary": {"drawer_vocab_size": vocab["drawer_vocab_size"],
                       "icr_vocab_size": vocab["icr_vocab_size"]},
        "summary": corpus_summary(corpus),
    })
    _write_tsv(out / "rank_frequency.tsv", ["form", "count"], ranks["entries"])
    for name in ("icr_tokens", "other_tokens"):
        rows = sorted(vocab[name].items(), key=lambda kv: (-kv[1], kv[0]))
        _write_tsv(out / f"vocab_{name}.tsv", ["token", "count"], rows)
    _write_tsv(out / "hist_icrs_by_round.tsv", ["round_index", "count"],
               sorted(hists["icrs_by_round"].items()))
    _write_tsv(out / "hist_icrs_per_dialogue.tsv", ["n_icrs", "n_dialogues"],
               sorted(hists["icrs_per_dialogue"].items()))
    _write_tsv(out / "hist_icrs_by_dialogue_length.tsv", ["n_rounds", "n_icrs", "count"],
               sorted((r, k, c) for (r, k), c in hists["icrs_by_dialogue_length"].items()))
    if args.svg:
        top = ranks["entries"][:50]
        _plot_series(out / "rank_frequency.svg", top, "Most frequent clarification types",
                     "type", "count", kind="bar")
        _plot_series(out / "hist_icrs_by_round.svg", sorted(hists["icrs_by_round"].items()),
                     "Clarifications by round", "round index", "count", kind="bar")
        _plot_series(out / "hist_icrs_per_dialogue.svg",
                     sorted(hists["icrs_per_dialogue"].items()),
                     "Clarifications per dialogue", "clarifications", "dialogues", kind="bar")
    _write_manifest(args, "stats")
    print(json.dumps(stats, indent=1))
    return 0


def cmd_dynamics(args) -> int:
    out = _out_dir(args)
    corpus, _, _, projected = _projected_from_args(args)
    result = round_dynamics(corpus, projected, n_resamples=args.n_resamples,
                            seed=derive_seed(args.seed, "dynamics"))
    _write_json(out / "dynamics.json", result)
    _write_manifest(args, "dynamics")
    print(json.dumps(result, indent=1))
    return 0


def cmd_bigrams(args) -> int:
    out = _out_dir(args)
    corpus, _, _, projected = _projected_from_args(args)
    counts = initial_bigrams(projected, corpus)
    rows = sorted(((t1, t2, c) for (t1, t2), c in counts.items()),
                  key=lambda r: (-r[2], r[0], r[1]))
    _write_tsv(out / "bigrams.tsv", ["token_1", "token_2", "count"], rows)
    _write_manifest(args, "bigrams", {"distinct_bigrams": len(counts)})
    print(f"{len(counts)} distinct initial bigrams")
    return 0


def cmd_overlap(args) -> int:
    out = _out_dir(args)
    corpus, _, _, projected = _projected_from_args(args)
    result = split_overlap(projected, corpus)
    _write_json(out / "overlap.json", result)
    _write_manifest(args, "overlap")
    print(json.dumps(result, indent=1))
    return 0


def cmd_build_dataset(args) -> int:
    out = _out_dir(args)
    corpus, types, labels, projected = _projected_from_args(args)
    task = _task_of(args.task)
    datapoints = build_dataset(corpus, projected, task,
                               context_filter=ContextFilter(args.context_filter))
    by_split = split_datapoints(datapoints)
    counts = {}
    for split, dps in by_split.items():
        write_datapoints(dps, out / f"{task.value}.{split}.jsonl")
        positives = sum(1 for dp in dps if dp.label is Label.ICR)
        counts[split] = {"datapoints": len(dps), "icr": positives,
                         "pct_icr": 100.0 * positives / len(dps) if dps else 0.0}
    if args.features:
        vocab = teller_vocabulary(corpus) if task is Task.TASK1 else None
        content = load_content_words(args.content_words)
        for split, dps in by_split.items():
            if not dps:
                continue
            X = featurize_all(dps, vocab=vocab, content_words=content)
            write_features(X, [dp.label for dp in dps], out / f"{task.value}.{split}.features.tsv")
    _write_json(out / f"{task.value}.label_distribution.json", counts)
    _write_manifest(args, "build-dataset", {"counts": counts})
    print(json.dumps(counts, indent=1))
    return 0


def cmd_embed_fallback(args) -> int:
    out = _out_dir(args)
    corpus = load_corpus(args.corpus)
    task = _task_of(args.task)
    inputs = enumerate_inputs(corpus, task)
    seed = derive_seed(args.seed, "embed-fallback")
    ctx_store = EmbeddingStore(dim=TEXT_DIM, fallback=True)
    msg_store = EmbeddingStore(dim=TEXT_DIM, fallback=True)
    img_store = EmbeddingStore(dim=IMAGE_DIM, fallback=True)
    from .scene import serialize_scene

    scene_text: dict[str, str] = {}
    for dialogue in corpus:
        scene_text[f"{dialogue.id}/src/img"] = serialize_scene(dialogue.source_scene).replace(",", " ")
        for r in dialogue.rounds:
            scene_text[f"{dialogue.id}/{r.index}/img"] = serialize_scene(r.scene_after).replace(",", " ")
    for rec in inputs:
        ctx_store.add(rec.ctx_key, hash_embed(rec.context_text, TEXT_DIM, seed))
        msg_store.add(rec.msg_key, hash_embed(rec.message_text, TEXT_DIM, seed))
        if rec.scene_key not in img_store:
            img_store.add(rec.scene_key, hash_embed(scene_text[rec.scene_key], IMAGE_DIM, seed))
    paths = _store_paths(out, task)
    write_store(ctx_store, paths["ctx"])
    write_store(msg_store, paths["msg"])
    write_store(img_store, paths["img"])
    _write_manifest(args, "embed-fallback", {
        "records": {"ctx": len(ctx_store), "msg": len(msg_store), "img": len(img_store)},
        "fallback": True,
    })
    print(f"wrote fallback stores for {task.value}: {len(ctx_store)} ctx, "
          f"{len(msg_store)} msg, {len(img_store)} img")
    return 0


def _classifier_config(args) -> ClassifierConfig:
    if getattr(args, "config", None):
        return ClassifierConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    return ClassifierConfig()


def _train_config(args) -> TrainConfig:
    if getattr(args, "train_config", None):
        return TrainConfig(**json.loads(Path(args.train_config).read_text(encoding="utf-8")))
    return TrainConfig()


def cmd_train(args) -> int:
    out = _out_dir(args)
    corpus, types, labels, projected = _projected_from_args(args)
    task = _task_of(args.task)
    cfg = _classifier_config(args)
    tcfg = _train_config(args)
    datapoints = build_dataset(corpus, projected, task, context_filter=cfg.context_filter)
    by_split = split_datapoints(datapoints)
    bundle = _load_bundle(Path(args.store_dir), task, cfg)
    model = init_model(cfg, seed=derive_seed(tcfg.seed, "init"))
    checkpoint, history = train(model, by_split["train"], by_split["val"], bundle, tcfg)
    ckpt_path = out / f"{task.value}.ckpt"
    save_checkpoint(checkpoint, ckpt_path)
    with open(out / f"{task.value}.train_log.jsonl", "w", encoding="utf-8") as fh:
        for epoch in history:
            fh.write(json.dumps(epoch.as_dict()) + "\n")
    _write_manifest(args, "train", {
        "best_epoch": checkpoint.metadata["epoch"],
        "best_val_ap": checkpoint.metadata["val_ap"],
        "stores": checkpoint.metadata["stores"],
    })
    print(f"best epoch {checkpoint.metadata['epoch']} val AP {checkpoint.metadata['val_ap']:.4f} "
          f"-> {ckpt_path}")
    return 0


def cmd_predict(args) -> int:
    out = _out_dir(args)
    corpus, types, labels, projected = _projected_from_args(args)
    checkpoint = load_checkpoint(args.checkpoint)
    task = _task_of(args.task)
    datapoints = build_dataset(corpus, projected, task,
                               context_filter=checkpoint.config.context_filter)
    selected = split_datapoints(datapoints)[args.split]
    bundle = _load_bundle(Path(args.store_dir), task, checkpoint.config)
    scores = predict(checkpoint, selected, bundle)
    rows = [(dp.dialogue_id, dp.round_index, repr(float(s)), dp.label.value)
            for dp, s in zip(selected, scores)]
    _write_tsv(out / f"{task.value}.{args.split}.scores.tsv",
               ["dialogue_id", "round_index", "score", "label"], rows)
    _write_manifest(args, "predict", {"n_scores": len(rows)})
    print(f"wrote {len(rows)} scores")
    return 0


def _read_scores(path: str | Path):
    scores, labels, rounds = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        col = {name: i for i, name in enumerate(header)}
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            scores.append(float(parts[col["score"]]))
            labels.append(1 if parts[col["label"]] == Label.ICR.value else 0)
            rounds.append(int(parts[col["round_index"]]))
    return np.array(scores), np.array(labels), np.array(rounds)


def cmd_evaluate(args) -> int:
    out = _out_dir(args)
    scores, labels, rounds = _read_scores(args.scores)
    report = evaluate_scores(scores, labels, round_indices=rounds, split=args.split,
                             threshold=args.threshold)
    payload = report.as_dict()
    if args.random_baseline:
        ap, mf1 = random_baseline(labels, seed=derive_seed(args.seed, "random-baseline"))
        payload["random_ap"] = ap
        payload["random_mf1"] = mf1
    name = args.name or Path(args.scores).stem
    _write_json(out / f"{name}.report.json", payload)
    _write_tsv(out / f"{name}.pr_curve.tsv", ["recall", "precision"], report.pr_curve)
    _write_tsv(out / f"{name}.roc_curve.tsv", ["fpr", "tpr"], report.roc_curve)
    _write_tsv(out / f"{name}.per_round_ap.tsv", ["round_index", "ap"],
               sorted(report.per_round_ap.items()))
    if args.svg:
        _plot_series(out / f"{name}.pr_curve.svg", report.pr_curve,
                     "Precision-recall", "recall", "precision")
        _plot_series(out / f"{name}.roc_curve.svg", report.roc_curve,
                     "ROC", "false positive rate", "true positive rate")
        _plot_series(out / f"{name}.per_round_ap.svg", sorted(report.per_round_ap.items()),
                     "Average precision per round", "round index", "AP", kind="bar")
    _write_manifest(args, "evaluate", {"ap": report.ap, "macro_f1": report.macro_f1})
    print(f"AP {report.ap:.4f}  macro-F1 {report.macro_f1:.4f}  "
          f"(positives {report.positive_fraction:.4f})")
    return 0


def cmd_ablate(args) -> int:
    out = _out_dir(args)
    base = _classifier_config(args)
    variants = ablate(base)
    payload = {name: cfg.as_dict() for name, cfg in variants.items()}
    _write_json(out / "ablations.json", payload)
    for name, cfg in variants.items():
        _write_json(out / f"ablation.{name}.json", cfg.as_dict())
    _write_manifest(args, "ablate", {"variants": sorted(variants)})
    print(f"wrote {len(variants)} ablation configs")
    return 0


def cmd_report(args) -> int:
    out = _out_dir(args)
    cells = {}
    for system, split, task, path in args.cell or []:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        cells[(system, split, _task_of(task).value)] = {"ap": payload.get("ap"),
                                                        "mf1": payload.get("macro_f1")}
        if system == "random" and "random_ap" in payload:
            cells[(system, split, _task_of(task).value)] = {"ap": payload["random_ap"],
                                                            "mf1": payload["random_mf1"]}
    table = results_table(cells)
    (out / "results.txt").write_text(table + "\n", encoding="utf-8")
    _write_json(out / "results.json", {f"{s}/{sp}/{t}": v for (s, sp, t), v in cells.items()})
    _write_manifest(args, "report", {"cells": len(cells)})
    print(table)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icr", description=__doc__)
    parser.add_argument("--out-dir", default=DEFAULT_OUT_DIR,
                        help="output directory (env ICR_OUT_DIR overrides the default)")
    parser.add_argument("--seed", type=int, default=0, help="master seed for all stages")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=handler)
        return p

    p = add("synth", cmd_synth, help="generate a deterministic synthetic corpus")
    p.add_argument("--n-dialogues", type=int, default=30)
    p.add_argument("--icr-rate", type=float, default=0.11)
    p.add_argument("--min-rounds", type=int, default=3)
    p.add_argument("--max-rounds", type=int, default=12)

    for name, handler in (("ingest", cmd_ingest), ("validate", cmd_validate)):
        p = add(name, handler, help=f"{name} a dialogue corpus")
        p.add_argument("--corpus", required=True)
        p.add_argument("--splits", nargs="+", choices=["train", "val", "test"], default=None)

    p = add("collapse", cmd_collapse, help="collapse drawer utterances into types")
    p.add_argument("--corpus", required=True)

    p = add("annotate", cmd_annotate, help="interactive binary labeling session")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--annotator", default="annotator")

    p = add("agree", cmd_agree, help="inter-annotator agreement between two label files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels-a", required=True)
    p.add_argument("--labels-b", required=True)

    p = add("project", cmd_project, help="project type labels onto utterances")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--labels-b", default=None)
    p.add_argument("--policy", default="prefer_second", choices=["prefer_second", "prefer_first"])

    for name, handler in (("stats", cmd_stats), ("dynamics", cmd_dynamics),
                          ("bigrams", cmd_bigrams), ("overlap", cmd_overlap)):
        p = add(name, handler, help=f"corpus analysis: {name}")
        p.add_argument("--corpus", required=True)
        p.add_argument("--labels", required=True)
        if name == "stats":
            p.add_argument("--until-peek-inclusive", action="store_true")
            p.add_argument("--svg", action="store_true", help="also render SVG figures")
        if name == "dynamics":
            p.add_argument("--n-resamples", type=int, default=9999)

    p = add("build-dataset", cmd_build_dataset, help="assemble task datapoints")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--task", required=True, choices=["1", "2", "task1", "task2"])
    p.add_argument("--context-filter", default="none",
                   choices=[f.value for f in ContextFilter])
    p.add_argument("--features", action="store_true", help="also write feature vectors")
    p.add_argument("--content-words", default=None)

    p = add("embed-fallback", cmd_embed_fallback, help="hash-embedding stores (no pretrained models)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--task", required=True, choices=["1", "2", "task1", "task2"])

    p = add("train", cmd_train, help="train the neural classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--task", required=True, choices=["1", "2", "task1", "task2"])
    p.add_argument("--store-dir", required=True)
    p.add_argument("--config", default=None, help="classifier config JSON")
    p.add_argument("--train-config", default=None, help="training config JSON")

    p = add("predict", cmd_predict, help="score datapoints with a checkpoint")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--task", required=True, choices=["1", "2", "task1", "task2"])
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--store-dir", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])

    p = add("evaluate", cmd_evaluate, help="metrics report from a scores file")
    p.add_argument("--scores", required=True)
    p.add_argument("--split", default="")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--name", default=None)
    p.add_argument("--random-baseline", action="store_true")
    p.add_argument("--svg", action="store_true", help="also render SVG figures")

    p = add("ablate", cmd_ablate, help="emit the ablation config set")
    p.add_argument("--config", default=None, help="base classifier config JSON")

    p = add("report", cmd_report, help="assemble the main results table")
    p.add_argument("--cell", nargs=4, action="append",
                   metavar=("SYSTEM", "SPLIT", "TASK", "REPORT_JSON"))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IcrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
