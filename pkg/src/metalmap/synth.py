"""Deterministic synthetic logo corpora for desk-scale runs and tests.

Each class gets its own dominant palette, stroke style, and genre tag, so
class structure stays recoverable from color histograms alone. Given the
same seed the generator reproduces records and images byte for byte.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .corpus import BandRecord
from .features import RasterImage


class SynthSpecError(ValueError):
    pass


#: Base colors sit at quantization-bin centers (64-wide bins) so the +-24
#: per-item jitter never leaves the dominant bin.
_CLASS_DEFAULTS = (
    ("black metal", (32, 32, 32), "spikes"),
    ("death metal", (224, 32, 32), "bars"),
    ("thrash metal", (32, 32, 224), "cross"),
    ("heavy metal", (224, 160, 32), "arcs"),
    ("doom metal", (32, 224, 32), "bars"),
    ("power metal", (160, 32, 224), "spikes"),
    ("folk metal", (32, 224, 224), "arcs"),
    ("speed metal", (224, 224, 224), "cross"),
)

_SYLLABLES = ("mor", "gor", "thra", "vex", "nek", "dra", "ul", "kro", "bla", "zar", "gh", "ur")
_SUFFIXES = ("os", "eth", "ar", "um", "ix", "on")
_THEME_POOL = ("death", "war", "occult", "nature", "winter", "cosmos", "despair", "myth")
_COUNTRIES = ("Norway", "Sweden", "Germany", "Finland", "United States", None)


@dataclass(frozen=True)
class ClassStyle:
    genre: str
    color: tuple[int, int, int]
    stroke: str  # bars | spikes | arcs | cross


@dataclass(frozen=True)
class SynthSpec:
    n_classes: int = 3
    items_per_class: int = 5
    image_size: int = 96
    styles: tuple[ClassStyle, ...] | None = None

    def __post_init__(self):
        if self.n_classes < 2:
            raise SynthSpecError("need at least 2 classes")
        if self.items_per_class < 2:
            raise SynthSpecError("need at least 2 items per class")
        if self.image_size < 16:
            raise SynthSpecError("image_size must be >= 16")
        if self.styles is not None and len(self.styles) != self.n_classes:
            raise SynthSpecError("styles must match n_classes")
        if self.styles is None and self.n_classes > len(_CLASS_DEFAULTS):
            raise SynthSpecError(
                f"default styles cover up to {len(_CLASS_DEFAULTS)} classes; pass styles explicitly"
            )

    def resolved_styles(self) -> tuple[ClassStyle, ...]:
        if self.styles is not None:
            return self.styles
        return tuple(ClassStyle(*row) for row in _CLASS_DEFAULTS[: self.n_classes])


def _band_name(rng: np.random.Generator) -> str:
    parts = rng.integers(0, len(_SYLLABLES), size=2)
    suffix = _SYLLABLES[parts[0]] + _SYLLABLES[parts[1]] + _SUFFIXES[int(rng.integers(0, len(_SUFFIXES)))]
    return suffix.capitalize()


def _jittered(color: tuple[int, int, int], rng: np.random.Generator, spread: int) -> tuple[int, int, int, int]:
    jit = rng.integers(-spread, spread + 1, size=3)
    return (
        int(np.clip(color[0] + jit[0], 0, 255)),
        int(np.clip(color[1] + jit[1], 0, 255)),
        int(np.clip(color[2] + jit[2], 0, 255)),
        255,
    )


def _draw_logo(style: ClassStyle, size: int, rng: np.random.Generator) -> RasterImage:
    img = Image.new("RGBA", (size, size), (0, 0, 0, 0))
    draw = ImageDraw.Draw(img)
    base = _jittered(style.color, rng, 24)[:3]
    strokes = 6 + int(rng.integers(0, 5))
    width = max(2, size // 24)
    for _ in range(strokes):
        color = _jittered(base, rng, 16)
        if style.stroke == "bars":
            y = int(rng.integers(0, size))
            x0, x1 = sorted(rng.integers(0, size, size=2).tolist())
            draw.line([(x0, y), (max(x1, x0 + 4), y)], fill=color, width=width)
        elif style.stroke == "spikes":
            x = int(rng.integers(0, size))
            points = [(x, size - 1)]
            for _ in range(3):
                x = int(np.clip(x + rng.integers(-size // 4, size // 4 + 1), 0, size - 1))
                points.append((x, int(rng.integers(0, size))))
            draw.line(points, fill=color, width=width)
        elif style.stroke == "arcs":
            cx, cy = rng.integers(size // 4, 3 * size // 4, size=2).tolist()
            radius = int(rng.integers(size // 8, size // 3))
            box = [cx - radius, cy - radius, cx + radius, cy + radius]
            draw.arc(box, start=0, end=int(rng.integers(90, 360)), fill=color, width=width)
        else:  # cross
            x0, y0, x1, y1 = rng.integers(0, size, size=4).tolist()
            draw.line([(x0, y0), (x1, y1)], fill=color, width=width)
            draw.line([(x0, y1), (x1, y0)], fill=color, width=width)
    return RasterImage.from_pil(img)


def synth_corpus(spec: SynthSpec, seed: int) -> tuple[list[BandRecord], dict[str, RasterImage]]:
    """Generate (records, images) for the given class layout, reproducibly.

    A single generator seeded with ``seed`` drives, per item in order: the
    band name, theme choice, country choice, then the logo drawing. Every
    class shares one label so the records survive corpus filtering intact.
    """
    styles = spec.resolved_styles()
    rng = np.random.default_rng(seed)
    records: list[BandRecord] = []
    images: dict[str, RasterImage] = {}
    index = 0
    for class_idx, style in enumerate(styles):
        label = f"Forge {class_idx} Records"
        for _ in range(spec.items_per_class):
            item_id = f"synth{index:04d}"
            index += 1
            name = _band_name(rng)
            themes = sorted(
                {_THEME_POOL[int(t)] for t in rng.integers(0, len(_THEME_POOL), size=2)}
            )
            country = _COUNTRIES[int(rng.integers(0, len(_COUNTRIES)))]
            records.append(
                BandRecord.build(
                    id=item_id,
                    name=name,
                    genre_raw=style.genre.title(),
                    themes=themes,
                    label=label,
                    status="Active",
                    country=country,
                    logo_path=f"logos/{item_id}.png",
                )
            )
            images[item_id] = _draw_logo(style, spec.image_size, rng)
    return records, images
