"""Map documents: the serializable artifacts the exploration UI consumes.

A MapDocument joins corpus metadata, continuous 2-D coordinates, grid
cells, a genre-majority background raster, and the full provenance of how
all of it was computed. Documents are immutable after assembly and
round-trip exactly through JSON.
"""
from __future__ import annotations

import io
import json
import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from PIL import Image

from .corpus import BandRecord, TagVocabulary
from .embed import Layout2D
from .gridify import GridAssignment

SCHEMA_VERSION = 1

#: Fixed colors for the four hallmark genres.
GENRE_COLORS = {
    "black metal": "#ffffff",
    "death metal": "#ff0000",
    "thrash metal": "#0000ff",
    "heavy metal": "#ffd700",
}

#: Categorical palette for every other genre, assigned by lexicographic
#: rank of the genres present in a raster (stable under item reordering).
FALLBACK_PALETTE = (
    "#66c2a5",
    "#fc8d62",
    "#8da0cb",
    "#e78ac3",
    "#a6d854",
    "#ffd92f",
    "#e5c494",
    "#b3b3b3",
    "#1b9e77",
    "#d95f02",
    "#7570b3",
    "#e7298a",
)

#: Cells whose neighborhood has no vocabulary genre at all.
NO_GENRE_COLOR = "#888888"

PROVENANCE_KEYS = ("feature_kind", "metric", "embed_params", "grid_level", "curve", "collision_policy")

_NAME_PATTERN = re.compile(r"^[A-Za-z0-9._-]+$")


class MapAssemblyError(ValueError):
    pass


class MapFormatError(ValueError):
    pass


class MapVersionError(MapFormatError):
    pass


@dataclass(frozen=True)
class MapItem:
    id: str
    name: str
    genres: tuple[str, ...]
    themes: tuple[str, ...]
    status: str
    label: str | None
    x: float
    y: float
    gx: int
    gy: int
    thumb: str

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "genres": list(self.genres),
            "themes": list(self.themes),
            "status": self.status,
            "label": self.label,
            "x": self.x,
            "y": self.y,
            "gx": self.gx,
            "gy": self.gy,
            "thumb": self.thumb,
        }


@dataclass(frozen=True)
class BackgroundRaster:
    """Per-cell majority genre and its color, row-major from the min-y edge."""

    width: int
    height: int
    genres: tuple[str, ...]
    colors: tuple[str, ...]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("raster dimensions must be >= 1")
        if len(self.genres) != self.width * self.height:
            raise ValueError("genre grid size mismatch")
        if len(self.colors) != self.width * self.height:
            raise ValueError("color grid size mismatch")

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "genres": list(self.genres),
            "colors": list(self.colors),
        }


@dataclass(frozen=True)
class MapDocument:
    schema_version: int
    name: str
    items: tuple[MapItem, ...]
    provenance: dict
    background: BackgroundRaster | None = None

    def item_index(self) -> dict[str, MapItem]:
        return {item.id: item for item in self.items}

    def to_json(self) -> dict:
        doc = {
            "schema_version": self.schema_version,
            "name": self.name,
            "items": [item.to_json() for item in self.items],
            "provenance": self.provenance,
            "background": self.background.to_json() if self.background else None,
        }
        return doc


def primary_genre(genres: frozenset[str] | set[str], vocab: TagVocabulary) -> str:
    """First vocabulary-ordered tag carried by the item; "" when none is."""
    for tag in vocab.tags:
        if tag in genres:
            return tag
    return ""


def _color_table(genres_present: Sequence[str]) -> dict[str, str]:
    table = {"": NO_GENRE_COLOR}
    others = sorted(g for g in set(genres_present) if g and g not in GENRE_COLORS)
    for rank, genre in enumerate(others):
        table[genre] = FALLBACK_PALETTE[rank % len(FALLBACK_PALETTE)]
    table.update(GENRE_COLORS)
    return table


def genre_background(
    layout: Layout2D,
    genres_by_id: Mapping[str, frozenset[str] | set[str]],
    vocab: TagVocabulary,
    resolution: int = 64,
    k: int = 10,
) -> BackgroundRaster:
    """Majority primary-genre raster over the layout's bounding box.

    Every cell center adopts the most common primary genre among its k
    nearest items (ties broken by lexicographically smallest genre). Rows
    run from the minimum-y edge upward.
    """
    n = len(layout.ids)
    if n == 0:
        raise ValueError("layout must be non-empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    k = min(k, n)
    primaries = [primary_genre(genres_by_id[item_id], vocab) for item_id in layout.ids]
    # Deterministic distance ties: order candidate items by id.
    id_rank = np.argsort(np.argsort(np.array(layout.ids)))
    coords = layout.coordinates
    lows = coords.min(axis=0)
    highs = coords.max(axis=0)
    spans = np.where(highs > lows, highs - lows, 1.0)

    cell_genres: list[str] = []
    for row in range(resolution):
        cy = lows[1] + (row + 0.5) / resolution * spans[1]
        for col in range(resolution):
            cx = lows[0] + (col + 0.5) / resolution * spans[0]
            d2 = (coords[:, 0] - cx) ** 2 + (coords[:, 1] - cy) ** 2
            order = np.lexsort((id_rank, d2))[:k]
            votes: dict[str, int] = {}
            for idx in order:
                g = primaries[idx]
                votes[g] = votes.get(g, 0) + 1
            best = min(votes.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            cell_genres.append(best)

    table = _color_table(cell_genres)
    return BackgroundRaster(
        width=resolution,
        height=resolution,
        genres=tuple(cell_genres),
        colors=tuple(table[g] for g in cell_genres),
    )


def render_background_png(raster: BackgroundRaster) -> bytes:
    """One pixel per cell, top row = max-y edge (image convention)."""
    img = Image.new("RGB", (raster.width, raster.height))
    px = img.load()
    for row in range(raster.height):
        for col in range(raster.width):
            color = raster.colors[row * raster.width + col]
            px[col, raster.height - 1 - row] = tuple(
                int(color[i : i + 2], 16) for i in (1, 3, 5)
            )
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def validate_provenance(provenance: dict) -> None:
    missing = [key for key in PROVENANCE_KEYS if key not in provenance]
    if missing:
        raise MapAssemblyError(f"provenance missing keys: {', '.join(missing)}")
    if "seed" not in provenance.get("embed_params", {}):
        raise MapAssemblyError("provenance embed_params must include the seed")


def assemble_map(
    records: Sequence[BandRecord],
    layout: Layout2D,
    grid: GridAssignment,
    provenance: dict,
    name: str = "map",
    background: BackgroundRaster | None = None,
) -> MapDocument:
    """Join records, coordinates, and grid cells into one document.

    The three inputs must cover identical id sets; any mismatch raises with
    the symmetric difference spelled out.
    """
    if not _NAME_PATTERN.match(name):
        raise MapAssemblyError(f"map name {name!r} must match {_NAME_PATTERN.pattern}")
    record_ids = {r.id for r in records}
    layout_ids = set(layout.ids)
    grid_ids = set(grid.cells)
    if not (record_ids == layout_ids == grid_ids):
        diff = sorted(record_ids ^ layout_ids | record_ids ^ grid_ids | layout_ids ^ grid_ids)
        raise MapAssemblyError(f"id sets differ; symmetric difference: {', '.join(diff)}")
    validate_provenance(provenance)

    positions = {item_id: layout.coordinates[i] for i, item_id in enumerate(layout.ids)}
    items = []
    for record in sorted(records, key=lambda r: r.id):
        x, y = positions[record.id]
        gx, gy = grid.cells[record.id]
        items.append(
            MapItem(
                id=record.id,
                name=record.name,
                genres=tuple(sorted(record.genres)),
                themes=tuple(sorted(record.themes)),
                status=record.status.value,
                label=record.label,
                x=float(x),
                y=float(y),
                gx=gx,
                gy=gy,
                thumb=record.logo_path,
            )
        )
    return MapDocument(
        schema_version=SCHEMA_VERSION,
        name=name,
        items=tuple(items),
        provenance=provenance,
        background=background,
    )


def export_map(doc: MapDocument) -> bytes:
    """Canonical UTF-8 JSON bytes; identical documents export identically."""
    return json.dumps(
        doc.to_json(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise MapFormatError(message)


def import_map(data: bytes) -> MapDocument:
    """Parse and fully validate exported bytes; import(export(d)) == d."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MapFormatError(f"not valid JSON: {exc}") from exc
    _require(isinstance(obj, dict), "document must be a JSON object")
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise MapVersionError(f"unsupported schema_version {version!r}")
    for key in ("name", "items", "provenance"):
        _require(key in obj, f"missing key {key!r}")
    try:
        validate_provenance(obj["provenance"])
    except MapAssemblyError as exc:
        raise MapFormatError(str(exc)) from exc
    level = obj["provenance"]["grid_level"]
    _require(isinstance(level, int) and level >= 0, "grid_level must be a non-negative integer")
    side = 2**level

    items = []
    seen_cells: set[tuple[int, int]] = set()
    for raw in obj["items"]:
        item = MapItem(
            id=raw["id"],
            name=raw["name"],
            genres=tuple(raw["genres"]),
            themes=tuple(raw["themes"]),
            status=raw["status"],
            label=raw["label"],
            x=float(raw["x"]),
            y=float(raw["y"]),
            gx=int(raw["gx"]),
            gy=int(raw["gy"]),
            thumb=raw["thumb"],
        )
        _require(math.isfinite(item.x) and math.isfinite(item.y), f"non-finite coordinates for {item.id!r}")
        _require(0 <= item.gx < side and 0 <= item.gy < side, f"cell out of range for {item.id!r}")
        _require((item.gx, item.gy) not in seen_cells, f"duplicate cell {(item.gx, item.gy)}")
        seen_cells.add((item.gx, item.gy))
        items.append(item)

    background = None
    if obj.get("background") is not None:
        raw = obj["background"]
        background = BackgroundRaster(
            width=raw["width"],
            height=raw["height"],
            genres=tuple(raw["genres"]),
            colors=tuple(raw["colors"]),
        )
        allowed = set(GENRE_COLORS.values()) | set(FALLBACK_PALETTE) | {NO_GENRE_COLOR}
        _require(
            all(c in allowed for c in background.colors),
            "background colors must come from the fixed palette",
        )
    return MapDocument(
        schema_version=SCHEMA_VERSION,
        name=obj["name"],
        items=tuple(items),
        provenance=obj["provenance"],
        background=background,
    )


#: JSON Schema for the exported document (draft 2020-12).
MAP_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "name", "items", "provenance", "background"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": _NAME_PATTERN.pattern},
        "items": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "id", "name", "genres", "themes", "status",
                    "label", "x", "y", "gx", "gy", "thumb",
                ],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "name": {"type": "string"},
                    "genres": {"type": "array", "items": {"type": "string"}},
                    "themes": {"type": "array", "items": {"type": "string"}},
                    "status": {"enum": ["active", "inactive", "unknown"]},
                    "label": {"type": ["string", "null"]},
                    "x": {"type": "number"},
                    "y": {"type": "number"},
                    "gx": {"type": "integer", "minimum": 0},
                    "gy": {"type": "integer", "minimum": 0},
                    "thumb": {"type": "string"},
                },
            },
        },
        "provenance": {
            "type": "object",
            "required": list(PROVENANCE_KEYS),
            "properties": {
                "feature_kind": {"enum": ["histogram", "thumbnail", "latent", "tag"]},
                "metric": {
                    "enum": ["sokal_michener", "sokal_michener_classical", "l1", "euclidean"]
                },
                "embed_params": {"type": "object", "required": ["seed"]},
                "grid_level": {"type": "integer", "minimum": 0},
                "curve": {"const": "hilbert"},
                "collision_policy": {"const": "forward-wrap"},
            },
        },
        "background": {
            "type": ["object", "null"],
            "required": ["width", "height", "genres", "colors"],
            "properties": {
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1},
                "genres": {"type": "array", "items": {"type": "string"}},
                "colors": {
                    "type": "array",
                    "items": {"type": "string", "pattern": "^#[0-9a-f]{6}$"},
                },
            },
        },
    },
}
