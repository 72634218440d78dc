"""Pairwise distances and exact brute-force kNN graphs.

Three metrics cover the feature families: a matching-coefficient
dissimilarity for binary tag vectors, L1 for normalized histograms, and
Euclidean for thumbnails and latents. The kNN construction is exact; at
corpus scale (thousands of items) brute force is cheap and keeps results
reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .features import FeatureKind, FeatureSet


class MetricError(ValueError):
    pass


class Metric(Enum):
    SOKAL_MICHENER = "sokal_michener"
    SOKAL_MICHENER_CLASSICAL = "sokal_michener_classical"
    L1 = "l1"
    EUCLIDEAN = "euclidean"


#: Feature kinds each metric accepts.
COMPATIBLE_KINDS = {
    Metric.SOKAL_MICHENER: (FeatureKind.TAG,),
    Metric.SOKAL_MICHENER_CLASSICAL: (FeatureKind.TAG,),
    Metric.L1: (FeatureKind.HISTOGRAM,),
    Metric.EUCLIDEAN: (FeatureKind.THUMBNAIL, FeatureKind.LATENT),
}


def _check_pair(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1:
        raise MetricError("metric inputs must be 1-D vectors")
    if u.shape != v.shape:
        raise MetricError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    if u.shape[0] == 0:
        raise MetricError("vectors must be non-empty")
    return u, v


def sokal_michener(u, v, classical: bool = False) -> float:
    """Binary dissimilarity from matching/mismatching coordinate counts.

    With a = #(1,1), b = #(1,0), c = #(0,1), d = #(0,0), the default form is
    2(b+c) / (a + d + 2(b+c)), the convention of the main UMAP
    implementation; ``classical=True`` selects the simple-matching distance
    (b+c)/n instead.
    """
    u, v = _check_pair(u, v)
    for vec in (u, v):
        if not np.all((vec == 0.0) | (vec == 1.0)):
            raise MetricError("sokal_michener requires binary (0/1) vectors")
    matches = float(np.sum(u == v))
    mismatches = float(u.shape[0]) - matches
    if classical:
        return mismatches / u.shape[0]
    if mismatches == 0.0:
        return 0.0
    return 2.0 * mismatches / (matches + 2.0 * mismatches)


def l1_distance(u, v) -> float:
    u, v = _check_pair(u, v)
    return float(np.sum(np.abs(u - v)))


def euclidean_distance(u, v) -> float:
    u, v = _check_pair(u, v)
    return float(np.sqrt(np.sum((u - v) ** 2)))


def pairwise_distance(u, v, metric: Metric) -> float:
    if metric is Metric.SOKAL_MICHENER:
        return sokal_michener(u, v)
    if metric is Metric.SOKAL_MICHENER_CLASSICAL:
        return sokal_michener(u, v, classical=True)
    if metric is Metric.L1:
        return l1_distance(u, v)
    if metric is Metric.EUCLIDEAN:
        return euclidean_distance(u, v)
    raise MetricError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class NeighborGraph:
    """Exact kNN graph: per node, k (neighbor index, distance) pairs.

    Rows are sorted by ascending distance with ties broken by ascending
    neighbor index; self-edges are excluded.
    """

    n: int
    k: int
    ids: tuple[str, ...]
    indices: np.ndarray  # (n, k) int64
    distances: np.ndarray  # (n, k) float64

    def __post_init__(self):
        if self.indices.shape != (self.n, self.k) or self.distances.shape != (self.n, self.k):
            raise ValueError("neighbor arrays must have shape (n, k)")
        if len(self.ids) != self.n:
            raise ValueError("ids must have length n")
        rows = np.arange(self.n)[:, None]
        if np.any(self.indices == rows):
            raise ValueError("self-edges are not allowed")
        if np.any(self.distances < 0):
            raise ValueError("distances must be non-negative")

    def pairs(self, node: int) -> list[tuple[int, float]]:
        return list(zip(self.indices[node].tolist(), self.distances[node].tolist()))


def _distance_matrix(x: np.ndarray, metric: Metric) -> np.ndarray:
    n = x.shape[0]
    if metric in (Metric.SOKAL_MICHENER, Metric.SOKAL_MICHENER_CLASSICAL):
        ones = x @ x.T  # a: both 1
        inv = 1.0 - x
        zeros = inv @ inv.T  # d: both 0
        mismatches = x.shape[1] - ones - zeros
        if metric is Metric.SOKAL_MICHENER_CLASSICAL:
            return mismatches / x.shape[1]
        denom = ones + zeros + 2.0 * mismatches
        with np.errstate(invalid="ignore"):
            dist = np.where(mismatches == 0.0, 0.0, 2.0 * mismatches / denom)
        return dist
    if metric is Metric.L1:
        out = np.empty((n, n))
        for i in range(n):
            out[i] = np.abs(x - x[i]).sum(axis=1)
        return out
    if metric is Metric.EUCLIDEAN:
        sq = np.sum(x * x, axis=1)
        gram = x @ x.T
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
        return np.sqrt(d2)
    raise MetricError(f"unknown metric {metric!r}")


def knn_graph(features: FeatureSet, metric: Metric, k: int) -> NeighborGraph:
    """Exact k nearest neighbors per item under the chosen metric.

    Requires n >= k+1 and a metric compatible with the feature kind. Rows
    are deterministic: ascending distance, then ascending neighbor index.
    """
    if features.kind not in COMPATIBLE_KINDS[metric]:
        raise MetricError(
            f"metric {metric.value} is incompatible with {features.kind.value} features"
        )
    ids, x = features.matrix()
    n = len(ids)
    if k < 1:
        raise MetricError("k must be >= 1")
    if k >= n:
        raise MetricError(f"k={k} requires at least k+1={k + 1} items, got {n}")
    if metric in (Metric.SOKAL_MICHENER, Metric.SOKAL_MICHENER_CLASSICAL):
        if not np.all((x == 0.0) | (x == 1.0)):
            raise MetricError("sokal_michener requires binary (0/1) vectors")
    dist = _distance_matrix(x, metric)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    cols = np.arange(n)
    for i in range(n):
        order = np.lexsort((cols, dist[i]))
        row = order[order != i][:k]
        indices[i] = row
        distances[i] = dist[i, row]
    return NeighborGraph(n=n, k=k, ids=tuple(ids), indices=indices, distances=distances)
