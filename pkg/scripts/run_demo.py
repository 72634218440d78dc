#!/usr/bin/env python3
"""End-to-end demo: synthetic corpus -> two maps -> optional local server.

Builds a color-histogram map and a genre-tag map of the same corpus under
demo_out/, then (with --serve) serves them plus the UI bundle if one has
been built into frontend/dist.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from metalmap.config import PipelineConfig, merge_config
from metalmap.pipeline import run_atlas, write_synth_corpus
from metalmap.server import MapService, load_documents, serve
from metalmap.synth import SynthSpec

ROOT = Path(__file__).resolve().parent.parent


def build(out_root: Path, seed: int) -> Path:
    corpus_dir = out_root / "corpus"
    maps_dir = out_root / "maps"
    manifest, count = write_synth_corpus(
        SynthSpec(n_classes=4, items_per_class=50, image_size=96), seed, corpus_dir
    )
    print(f"corpus: {count} records at {manifest}")

    base = {
        "manifest": str(manifest),
        "image_root": str(corpus_dir),
        "seed": seed,
        "n_epochs": 300,
        "out": str(maps_dir),
    }
    for feature, metric, name in (
        ("histogram", "l1", "colors"),
        ("tag", "sokal_michener", "genres"),
    ):
        config = merge_config(
            PipelineConfig(),
            dict(base, feature=feature, metric=metric, map_name=name),
        )
        path = run_atlas(config, maps_dir)
        print(f"map: {path}")
    return maps_dir


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=ROOT / "demo_out")
    parser.add_argument("--seed", type=int, default=13)
    parser.add_argument("--serve", action="store_true")
    parser.add_argument("--port", type=int, default=8008)
    args = parser.parse_args()

    maps_dir = build(args.out, args.seed)
    if not args.serve:
        return 0

    ui_dir = ROOT / "frontend" / "dist"
    service = MapService(
        load_documents(maps_dir),
        image_root=args.out / "corpus",
        ui_dir=ui_dir if ui_dir.is_dir() else None,
    )
    print(f"serving on http://127.0.0.1:{args.port}/ (ctrl-c to stop)")
    serve(service, "127.0.0.1", args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
