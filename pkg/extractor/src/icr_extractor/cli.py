"""CLI for batch embedding extraction.

    icr-extract extract --corpus <path> --task {1,2} --out-dir <dir>
                        [--text-model NAME] [--image-model NAME] [--assets DIR]

Model names "hash" (text) and "random-projection" (image), or "fallback" for
either, select the deterministic offline encoders; anything else is resolved
as a pretrained model and fails with a clear error when weights cannot load.
"""

from __future__ import annotations

import argparse
import sys

from icr.corpus import load_corpus
from icr.datasets import Task

from .encoders import ModelUnavailable, make_image_encoder, make_text_encoder
from .extract import run_extraction
from .render import CanvasGeometry, MissingAsset


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icr-extract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", help="write ctx/msg/img embedding stores for one task")
    p.add_argument("--corpus", required=True)
    p.add_argument("--task", required=True, choices=["1", "2", "task1", "task2"])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--text-model", default="all-mpnet-base-v2")
    p.add_argument("--image-model", default="resnet101")
    p.add_argument("--assets", default=None, help="directory of official clipart PNGs")
    p.add_argument("--seed", type=int, default=0, help="seed for the fallback encoders")
    p.add_argument("--canvas", default="500x400", help="render canvas WxH")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    task = Task.TASK1 if args.task in ("1", "task1") else Task.TASK2
    width, height = (int(v) for v in args.canvas.split("x"))
    geometry = CanvasGeometry(width=width, height=height)
    try:
        text_encoder = make_text_encoder(args.text_model, seed=args.seed)
        image_encoder = make_image_encoder(args.image_model, seed=args.seed)
        corpus = load_corpus(args.corpus)
        result = run_extraction(corpus, task, args.out_dir, text_encoder, image_encoder,
                                geometry=geometry, assets_dir=args.assets)
    except (ModelUnavailable, MissingAsset) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    records = result.manifest["records"]
    print(f"wrote {task.value} stores to {args.out_dir}: "
          f"{records['ctx']} ctx, {records['msg']} msg, {records['img']} img "
          f"(text={result.manifest['text_model']}, image={result.manifest['image_model']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
