"""Image feature extraction and feature-set I/O.

Logos become fixed-length vectors in one of four families: quantized color
histograms, greyscale thumbnails, externally computed latent vectors, and
binary genre-tag vectors (the latter built in :mod:`metalmap.corpus`).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np
from PIL import Image


class EmptyImageError(ValueError):
    """Image has no opaque pixels to measure."""


class LatentFormatError(ValueError):
    """Malformed feature-vector text file."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class FeatureKind(Enum):
    HISTOGRAM = "histogram"
    THUMBNAIL = "thumbnail"
    LATENT = "latent"
    TAG = "tag"


@dataclass(frozen=True)
class RasterImage:
    """8-bit RGBA raster, pixels row-major with shape (height, width, 4)."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.pixels.shape != (self.height, self.width, 4):
            raise ValueError(
                f"pixel buffer shape {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x4"
            )
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be uint8")

    @classmethod
    def from_pil(cls, image: Image.Image) -> "RasterImage":
        rgba = image.convert("RGBA")
        return cls(rgba.width, rgba.height, np.asarray(rgba, dtype=np.uint8))

    @classmethod
    def from_file(cls, path: str | Path) -> "RasterImage":
        with Image.open(path) as img:
            return cls.from_pil(img)

    @classmethod
    def solid(cls, width: int, height: int, rgba: tuple[int, int, int, int]) -> "RasterImage":
        buf = np.empty((height, width, 4), dtype=np.uint8)
        buf[:, :] = rgba
        return cls(width, height, buf)

    def to_pil(self) -> Image.Image:
        return Image.fromarray(self.pixels, mode="RGBA")


@dataclass
class FeatureSet:
    """Named family of equal-dimension vectors keyed by item id."""

    kind: FeatureKind
    dim: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        for item_id, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise ValueError(f"vector {item_id!r} has length {vec.shape}, expected {self.dim}")

    def __len__(self) -> int:
        return len(self.vectors)

    def matrix(self) -> tuple[list[str], np.ndarray]:
        """Ids in insertion order plus the stacked (n, dim) matrix."""
        ids = list(self.vectors)
        if not ids:
            return ids, np.empty((0, self.dim))
        return ids, np.stack([self.vectors[i] for i in ids])


def color_histogram(image: RasterImage, bins_per_channel: int = 4) -> np.ndarray:
    """L1-normalized RGB histogram over opaque pixels (alpha >= 128).

    Channels quantize into equal ranges (value v -> bin v*bins//256), flat
    index r*bins^2 + g*bins + b. Position-free by construction.
    """
    if not 2 <= bins_per_channel <= 16:
        raise ValueError("bins_per_channel must be in [2, 16]")
    px = image.pixels.reshape(-1, 4)
    opaque = px[px[:, 3] >= 128]
    if opaque.shape[0] == 0:
        raise EmptyImageError("image has no pixels with alpha >= 128")
    bins = bins_per_channel
    quantized = (opaque[:, :3].astype(np.int64) * bins) // 256
    flat = quantized[:, 0] * bins * bins + quantized[:, 1] * bins + quantized[:, 2]
    counts = np.bincount(flat, minlength=bins**3).astype(np.float64)
    return counts / counts.sum()


def _bilinear_resample(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Point-sampled bilinear interpolation (no area averaging).

    Identity when sizes match, which keeps already-thumbnail-sized inputs
    exact.
    """
    in_h, in_w = img.shape[:2]
    ys = np.clip((np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5, 0.0, in_h - 1.0)
    xs = np.clip((np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    top = img[y0][:, x0] * (1.0 - wx) + img[y0][:, x1] * wx
    bottom = img[y1][:, x0] * (1.0 - wx) + img[y1][:, x1] * wx
    return top * (1.0 - wy) + bottom * wy


def grey_thumbnail(image: RasterImage, side: int = 64) -> np.ndarray:
    """Flattened side*side greyscale thumbnail in [0, 1].

    The image is alpha-composited over white, centered on a white square
    (aspect ratio preserved), bilinearly resampled, and reduced to Rec.601
    luminance.
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    px = image.pixels.astype(np.float64)
    alpha = px[:, :, 3:4] / 255.0
    rgb = px[:, :, :3] * alpha + 255.0 * (1.0 - alpha)
    square = max(image.width, image.height)
    canvas = np.full((square, square, 3), 255.0)
    top = (square - image.height) // 2
    left = (square - image.width) // 2
    canvas[top : top + image.height, left : left + image.width] = rgb
    resampled = _bilinear_resample(canvas, side, side)
    luminance = (
        0.299 * resampled[:, :, 0] + 0.587 * resampled[:, :, 1] + 0.114 * resampled[:, :, 2]
    )
    return (luminance / 255.0).reshape(-1)


def load_feature_file(stream: Iterable[str], kind: FeatureKind) -> FeatureSet:
    """Parse "<id> <v1> ... <vd>" lines into a FeatureSet.

    All rows must agree on dimension; ids must be unique; values must be
    finite decimal numbers.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    for lineno, raw in enumerate(stream, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        item_id, *values = tokens
        if not values:
            raise LatentFormatError(f"id {item_id!r} has no values", line=lineno)
        try:
            vec = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError as exc:
            raise LatentFormatError(f"non-numeric token in row {item_id!r}", line=lineno) from exc
        if not np.all(np.isfinite(vec)):
            raise LatentFormatError(f"non-finite value in row {item_id!r}", line=lineno)
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise LatentFormatError(
                f"row {item_id!r} has {len(vec)} values, expected {dim}", line=lineno
            )
        if item_id in vectors:
            raise LatentFormatError(f"duplicate id {item_id!r}", line=lineno)
        vectors[item_id] = vec
    if dim is None:
        raise LatentFormatError("feature stream is empty")
    return FeatureSet(kind=kind, dim=dim, vectors=vectors)


def load_latents(stream: Iterable[str]) -> FeatureSet:
    """Ingest externally computed latent vectors (see load_feature_file)."""
    return load_feature_file(stream, FeatureKind.LATENT)


def save_feature_file(features: FeatureSet, fp: IO[str]) -> None:
    """Inverse of load_feature_file; floats keep full round-trip precision."""
    for item_id, vec in features.vectors.items():
        fp.write(item_id + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def image_features(
    images: Mapping[str, RasterImage],
    kind: FeatureKind,
    bins_per_channel: int = 4,
    side: int = 64,
) -> FeatureSet:
    """Compute histogram or thumbnail features for a batch of images."""
    if kind is FeatureKind.HISTOGRAM:
        vectors = {i: color_histogram(img, bins_per_channel) for i, img in images.items()}
        dim = bins_per_channel**3
    elif kind is FeatureKind.THUMBNAIL:
        vectors = {i: grey_thumbnail(img, side) for i, img in images.items()}
        dim = side * side
    else:
        raise ValueError(f"cannot compute {kind.value} features from images")
    return FeatureSet(kind=kind, dim=dim, vectors=vectors)
