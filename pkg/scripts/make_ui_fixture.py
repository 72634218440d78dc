#!/usr/bin/env python3
"""Regenerate the frontend test fixture: a 200-item synthetic map document.

Writes frontend/test/fixtures/map_fixture.json. Deterministic, so the
checked-in fixture can always be reproduced from here.
"""
from __future__ import annotations

from pathlib import Path
from tempfile import TemporaryDirectory

from metalmap.config import PipelineConfig, merge_config
from metalmap.pipeline import run_atlas, write_synth_corpus
from metalmap.synth import SynthSpec

ROOT = Path(__file__).resolve().parent.parent
TARGET = ROOT / "frontend" / "test" / "fixtures" / "map_fixture.json"


def main() -> int:
    with TemporaryDirectory() as scratch:
        scratch_dir = Path(scratch)
        manifest, _ = write_synth_corpus(
            SynthSpec(n_classes=4, items_per_class=50, image_size=64), 13, scratch_dir
        )
        config = merge_config(
            PipelineConfig(),
            {
                "manifest": str(manifest),
                "image_root": str(scratch_dir),
                "feature": "histogram",
                "metric": "l1",
                "seed": 29,
                "n_epochs": 200,
                "map_name": "fixture",
                "out": str(scratch_dir / "out"),
            },
        )
        map_path = run_atlas(config, scratch_dir / "out")
        TARGET.parent.mkdir(parents=True, exist_ok=True)
        TARGET.write_bytes(map_path.read_bytes())
    print(f"wrote {TARGET}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
