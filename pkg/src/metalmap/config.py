"""Pipeline configuration: dataclass defaults plus TOML-style overrides."""
from __future__ import annotations

import sys
from dataclasses import dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    manifest: str | None = None
    image_root: str | None = None
    feature: str = "histogram"  # histogram | thumbnail | latent | tag
    latent_file: str | None = None
    metric: str = "l1"
    vocab_size: int = 51
    histogram_bins: int = 4
    thumbnail_side: int = 64
    embed_k: int = 15
    min_dist: float = 0.1
    spread: float = 1.0
    n_epochs: int = 500
    negative_samples: int = 5
    initial_lr: float = 1.0
    seed: int = 0
    occupancy: float = 1.0
    background_resolution: int = 64
    background_k: int = 10
    map_name: str | None = None
    out: str = "out"
    host: str = "127.0.0.1"
    port: int = 8008
    ui_dir: str | None = None

    def resolved_map_name(self) -> str:
        return self.map_name or f"{self.feature}-{self.metric}"


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def load_config(path: str | Path) -> PipelineConfig:
    """Read a flat key = value TOML file into a PipelineConfig.

    Unknown keys are rejected so typos fail loudly.
    """
    with open(path, "rb") as fp:
        try:
            raw = tomllib.load(fp)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return merge_config(PipelineConfig(), raw, source=str(path))


def merge_config(base: PipelineConfig, overrides: dict, source: str = "overrides") -> PipelineConfig:
    for key, value in overrides.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}: unknown config key {key!r}")
        current = getattr(base, key)
        if isinstance(current, bool) or isinstance(value, bool):
            raise ConfigError(f"{source}: unexpected boolean for {key!r}")
        if isinstance(current, int) and isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{source}: {key!r} must be an integer")
        if isinstance(current, int) and isinstance(value, float):
            value = int(value)
        if isinstance(current, float) and isinstance(value, int):
            value = float(value)
        setattr(base, key, value)
    return base
