"""File-level pipeline stages shared by the CLI.

Each stage reads and writes the documented formats (JSON-lines manifests,
whitespace feature files, JSON layouts/grids/maps) so stages can run
standalone or chained by the atlas stage.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import atlas as atlas_mod
from .config import ConfigError, PipelineConfig
from .corpus import (
    BandRecord,
    FilterReport,
    apply_filters,
    build_vocabulary,
    parse_manifest,
    tag_vector,
)
from .embed import EmbedParams, Layout2D, embed
from .features import FeatureKind, FeatureSet, RasterImage, image_features, load_feature_file, save_feature_file
from .gridify import COLLISION_POLICY, assign_cells, choose_level
from .metrics import Metric
from .synth import SynthSpec, synth_corpus


def embed_params_from_config(config: PipelineConfig) -> EmbedParams:
    return EmbedParams(
        k=config.embed_k,
        min_dist=config.min_dist,
        spread=config.spread,
        n_epochs=config.n_epochs,
        negative_samples=config.negative_samples,
        initial_lr=config.initial_lr,
        seed=config.seed,
    )


def parse_metric(name: str) -> Metric:
    try:
        return Metric(name)
    except ValueError:
        raise ConfigError(f"unknown metric {name!r}") from None


def parse_feature_kind(name: str) -> FeatureKind:
    try:
        return FeatureKind(name)
    except ValueError:
        raise ConfigError(f"unknown feature kind {name!r}") from None


def write_synth_corpus(spec: SynthSpec, seed: int, out_dir: Path) -> tuple[Path, int]:
    """Generate a synthetic corpus on disk: manifest.jsonl plus logo PNGs."""
    records, images = synth_corpus(spec, seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "logos").mkdir(exist_ok=True)
    manifest = out_dir / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as fp:
        for record in records:
            fp.write(record.to_manifest_json() + "\n")
    for item_id, image in images.items():
        image.to_pil().save(out_dir / "logos" / f"{item_id}.png")
    return manifest, len(records)


def run_ingest(manifest_path: Path, out_dir: Path) -> tuple[list[BandRecord], FilterReport]:
    with open(manifest_path, encoding="utf-8") as fp:
        records = parse_manifest(fp)
    kept, report = apply_filters(records)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "records.jsonl", "w", encoding="utf-8") as fp:
        for record in kept:
            fp.write(record.to_manifest_json() + "\n")
    with open(out_dir / "filter_report.json", "w", encoding="utf-8") as fp:
        json.dump(report.to_json(), fp, indent=2, sort_keys=True)
        fp.write("\n")
    return kept, report


def load_corpus_images(records: list[BandRecord], image_root: Path) -> dict[str, RasterImage]:
    return {
        record.id: RasterImage.from_file(image_root / record.logo_path) for record in records
    }


def compute_features(config: PipelineConfig, records: list[BandRecord]) -> FeatureSet:
    kind = parse_feature_kind(config.feature)
    if kind is FeatureKind.TAG:
        vocab = build_vocabulary(records, config.vocab_size)
        vectors = {record.id: tag_vector(record, vocab) for record in records}
        return FeatureSet(kind=kind, dim=len(vocab), vectors=vectors)
    if kind is FeatureKind.LATENT:
        if not config.latent_file:
            raise ConfigError("latent features need latent_file in the config")
        with open(config.latent_file, encoding="utf-8") as fp:
            return load_feature_file(fp, FeatureKind.LATENT)
    if not config.image_root:
        raise ConfigError(f"{kind.value} features need image_root in the config")
    images = load_corpus_images(records, Path(config.image_root))
    return image_features(
        images, kind, bins_per_channel=config.histogram_bins, side=config.thumbnail_side
    )


def run_features(config: PipelineConfig, records_path: Path, out_dir: Path) -> Path:
    with open(records_path, encoding="utf-8") as fp:
        records = parse_manifest(fp)
    features = compute_features(config, records)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"features_{features.kind.value}.txt"
    with open(out_path, "w", encoding="utf-8") as fp:
        save_feature_file(features, fp)
    return out_path


def layout_to_json(layout: Layout2D, provenance: dict) -> dict:
    return {
        "ids": list(layout.ids),
        "coordinates": [[float(x), float(y)] for x, y in layout.coordinates],
        "provenance": provenance,
    }


def layout_from_json(obj: dict) -> tuple[Layout2D, dict]:
    layout = Layout2D(
        ids=tuple(obj["ids"]), coordinates=np.array(obj["coordinates"], dtype=np.float64)
    )
    return layout, obj.get("provenance", {})


def run_embed(config: PipelineConfig, features_path: Path, out_dir: Path) -> Path:
    kind = parse_feature_kind(config.feature)
    with open(features_path, encoding="utf-8") as fp:
        features = load_feature_file(fp, kind)
    layout, provenance = embed(features, parse_metric(config.metric), embed_params_from_config(config))
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "layout.json"
    with open(out_path, "w", encoding="utf-8") as fp:
        json.dump(layout_to_json(layout, provenance), fp, sort_keys=True)
        fp.write("\n")
    return out_path


def run_gridify(config: PipelineConfig, layout_path: Path, out_dir: Path) -> Path:
    with open(layout_path, encoding="utf-8") as fp:
        layout, _ = layout_from_json(json.load(fp))
    level = choose_level(len(layout.ids), config.occupancy)
    grid = assign_cells(layout, level)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "grid.json"
    with open(out_path, "w", encoding="utf-8") as fp:
        json.dump(
            {
                "level": grid.level,
                "curve": grid.curve,
                "cells": {item_id: list(cell) for item_id, cell in grid.cells.items()},
            },
            fp,
            sort_keys=True,
        )
        fp.write("\n")
    return out_path


def run_atlas(config: PipelineConfig, out_dir: Path) -> Path:
    """Chain ingest -> features -> embed -> gridify -> background -> export."""
    if not config.manifest:
        raise ConfigError("atlas needs a manifest path")
    kept, _report = run_ingest(Path(config.manifest), out_dir)
    if not kept:
        raise ConfigError("no records survive filtering; nothing to map")
    features = compute_features(config, kept)
    missing = [r.id for r in kept if r.id not in features.vectors]
    if missing:
        raise ConfigError(f"features missing for ids: {', '.join(missing[:10])}")
    metric = parse_metric(config.metric)
    layout, provenance = embed(features, metric, embed_params_from_config(config))
    level = choose_level(len(layout.ids), config.occupancy)
    grid = assign_cells(layout, level)
    provenance = dict(provenance)
    provenance.update(
        {
            "grid_level": level,
            "curve": grid.curve,
            "collision_policy": COLLISION_POLICY,
            "occupancy": config.occupancy,
            "background": {
                "method": "knn-majority",
                "k": config.background_k,
                "resolution": config.background_resolution,
            },
        }
    )
    vocab = build_vocabulary(kept, config.vocab_size)
    background = atlas_mod.genre_background(
        layout,
        {record.id: record.genres for record in kept},
        vocab,
        resolution=config.background_resolution,
        k=config.background_k,
    )
    keep_by_id = {record.id: record for record in kept}
    records_in_layout = [keep_by_id[i] for i in layout.ids]
    doc = atlas_mod.assemble_map(
        records_in_layout,
        layout,
        grid,
        provenance,
        name=config.resolved_map_name(),
        background=background,
    )
    out_path = out_dir / f"map_{doc.name}.json"
    out_path.write_bytes(atlas_mod.export_map(doc))
    return out_path
