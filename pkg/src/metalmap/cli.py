"""Command-line driver for the corpus-to-map pipeline and the map service."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .config import ConfigError, PipelineConfig, load_config, merge_config
from .doom import load_ratings, rating_report
from .server import MapService, load_documents, serve
from .synth import SynthSpec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metalmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, help="TOML config file")
        p.add_argument("--seed", type=int, help="override the pipeline seed")
        p.add_argument("--out", type=Path, help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic logo corpus")
    add_common(p)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--per-class", type=int, default=5)
    p.add_argument("--image-size", type=int, default=96)

    p = sub.add_parser("ingest", help="parse and filter a corpus manifest")
    add_common(p)
    p.add_argument("--manifest", type=Path)

    p = sub.add_parser("features", help="compute feature vectors for records")
    add_common(p)
    p.add_argument("--records", type=Path, help="records.jsonl from ingest")
    p.add_argument("--feature", choices=["histogram", "thumbnail", "latent", "tag"])
    p.add_argument("--image-root", type=Path)
    p.add_argument("--latent-file", type=Path)

    p = sub.add_parser("embed", help="project a feature file to 2-D")
    add_common(p)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--feature", choices=["histogram", "thumbnail", "latent", "tag"])
    p.add_argument("--metric", choices=["sokal_michener", "sokal_michener_classical", "l1", "euclidean"])
    p.add_argument("--n-epochs", type=int)

    p = sub.add_parser("gridify", help="assign layout points to grid cells")
    add_common(p)
    p.add_argument("--layout", type=Path, required=True)
    p.add_argument("--occupancy", type=float)

    p = sub.add_parser("atlas", help="run the full pipeline to a map document")
    add_common(p)
    p.add_argument("--manifest", type=Path)
    p.add_argument("--image-root", type=Path)
    p.add_argument("--feature", choices=["histogram", "thumbnail", "latent", "tag"])
    p.add_argument("--metric", choices=["sokal_michener", "sokal_michener_classical", "l1", "euclidean"])
    p.add_argument("--n-epochs", type=int)
    p.add_argument("--name", help="map name for the exported document")

    p = sub.add_parser("serve", help="serve map documents over HTTP")
    add_common(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui-dir", type=Path)

    p = sub.add_parser("rate-stats", help="summarize a design-space ratings CSV")
    add_common(p)
    p.add_argument("--ratings", type=Path, required=True)

    return parser


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    mapping = {
        "seed": "seed",
        "manifest": "manifest",
        "image_root": "image_root",
        "feature": "feature",
        "metric": "metric",
        "latent_file": "latent_file",
        "occupancy": "occupancy",
        "n_epochs": "n_epochs",
        "name": "map_name",
        "host": "host",
        "port": "port",
        "ui_dir": "ui_dir",
        "out": "out",
    }
    for arg_name, key in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[key] = str(value) if isinstance(value, Path) else value
    return merge_config(config, overrides, source="command line")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        out_dir = Path(config.out)
        if args.command == "synth":
            spec = SynthSpec(
                n_classes=args.classes,
                items_per_class=args.per_class,
                image_size=args.image_size,
            )
            manifest, count = pipeline.write_synth_corpus(spec, config.seed, out_dir)
            print(f"wrote {count} records to {manifest}")
        elif args.command == "ingest":
            if not config.manifest:
                raise ConfigError("ingest needs --manifest or a config with one")
            _, report = pipeline.run_ingest(Path(config.manifest), out_dir)
            print(json.dumps(report.to_json(), indent=2, sort_keys=True))
        elif args.command == "features":
            records = args.records or (out_dir / "records.jsonl")
            path = pipeline.run_features(config, Path(records), out_dir)
            print(f"wrote {path}")
        elif args.command == "embed":
            path = pipeline.run_embed(config, args.features, out_dir)
            print(f"wrote {path}")
        elif args.command == "gridify":
            path = pipeline.run_gridify(config, args.layout, out_dir)
            print(f"wrote {path}")
        elif args.command == "atlas":
            path = pipeline.run_atlas(config, out_dir)
            print(f"wrote {path}")
        elif args.command == "serve":
            documents = load_documents(out_dir)
            if not documents:
                raise ConfigError(f"no map_*.json documents found in {out_dir}")
            service = MapService(
                documents,
                image_root=Path(config.image_root) if config.image_root else None,
                ui_dir=Path(config.ui_dir) if config.ui_dir else None,
            )
            print(f"serving {len(documents)} maps on http://{config.host}:{config.port}")
            serve(service, config.host, config.port)
        elif args.command == "rate-stats":
            with open(args.ratings, encoding="utf-8") as fp:
                table = load_ratings(fp)
            report = rating_report(table)
            out_dir.mkdir(parents=True, exist_ok=True)
            report_path = out_dir / "rating_report.json"
            with open(report_path, "w", encoding="utf-8") as fp:
                json.dump(report, fp, indent=2, sort_keys=True)
                fp.write("\n")
            print(f"wrote {report_path}")
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    raise SystemExit(main())
