"""2-D neighbor embedding built from scratch.

Pipeline: exact kNN graph -> per-node bandwidth calibration -> fuzzy union
symmetrization -> stochastic layout optimization with negative sampling.
The low-dimensional similarity curve phi(d) = 1 / (1 + a*d^(2b)) is fitted
to an offset exponential so that min_dist/spread behave as soft distance
targets.

Everything downstream of the seed is deterministic: a single seeded
generator drives (in order) the initial uniform positions, then, per fired
edge, one batch of negative-sample indices for each endpoint. The
optimization loop is sequential by contract; a parallel variant would have
to be opt-in and flagged in provenance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .features import FeatureSet
from .metrics import Metric, NeighborGraph, knn_graph

SIGMA_MIN = 1e-3
SMOOTH_TOLERANCE = 1e-5
SMOOTH_MAX_ITER = 64
GRAD_CLIP = 4.0
REPULSION_GUARD = 1e-3
INIT_RANGE = 10.0  # initial positions drawn uniformly from [-10, 10]^2


class FitConvergenceError(RuntimeError):
    """Curve fit failed to converge; carries the best candidate found."""

    def __init__(self, message: str, a: float, b: float):
        super().__init__(message)
        self.a = a
        self.b = b


@dataclass(frozen=True)
class EmbedParams:
    k: int = 15
    min_dist: float = 0.1
    spread: float = 1.0
    n_epochs: int = 500
    negative_samples: int = 5
    initial_lr: float = 1.0
    seed: int = 0
    a: float | None = None  # curve parameters; fitted from min_dist/spread when None
    b: float | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not (0.0 < self.min_dist <= self.spread):
            raise ValueError("min_dist must satisfy 0 < min_dist <= spread")
        if self.n_epochs < 1:
            raise ValueError("n_epochs must be >= 1")
        if self.negative_samples < 0:
            raise ValueError("negative_samples must be >= 0")
        if self.initial_lr <= 0.0:
            raise ValueError("initial_lr must be positive")
        for name in ("a", "b"):
            value = getattr(self, name)
            if value is not None and value <= 0.0:
                raise ValueError(f"{name} must be positive when overridden")

    def resolved_ab(self) -> tuple[float, float]:
        if self.a is not None and self.b is not None:
            return self.a, self.b
        return fit_ab(self.min_dist, self.spread)

    def to_json(self) -> dict:
        a, b = self.resolved_ab()
        return {
            "k": self.k,
            "min_dist": self.min_dist,
            "spread": self.spread,
            "n_epochs": self.n_epochs,
            "negative_samples": self.negative_samples,
            "initial_lr": self.initial_lr,
            "seed": self.seed,
            "a": a,
            "b": b,
            "init": "uniform",
        }


@dataclass(frozen=True)
class SmoothedKnn:
    """Directed neighbor weights after per-node bandwidth calibration.

    rho is the distance to each node's nearest neighbor; sigma is chosen by
    binary search so the weights exp(-max(0, d - rho)/sigma) sum to
    log2(k), clamping at SIGMA_MIN when that target is unreachable.
    """

    graph: NeighborGraph
    rho: np.ndarray  # (n,)
    sigma: np.ndarray  # (n,)
    weights: np.ndarray  # (n, k), aligned with graph.indices


@dataclass(frozen=True)
class FuzzyGraph:
    """Undirected weighted edges (i < j) after fuzzy-union symmetrization."""

    n: int
    edges_i: np.ndarray
    edges_j: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if np.any(self.edges_i >= self.edges_j):
            raise ValueError("edges must satisfy i < j")

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def weight_lookup(self) -> dict[tuple[int, int], float]:
        return {
            (int(i), int(j)): float(w)
            for i, j, w in zip(self.edges_i, self.edges_j, self.weights)
        }


@dataclass(frozen=True)
class Layout2D:
    ids: tuple[str, ...]
    coordinates: np.ndarray  # (n, 2) float64

    def __post_init__(self):
        if self.coordinates.shape != (len(self.ids), 2):
            raise ValueError("coordinates must have shape (n, 2)")
        if not np.all(np.isfinite(self.coordinates)):
            raise ValueError("coordinates must be finite")


def _calibrate_sigma(dists: np.ndarray, target: float) -> float:
    rho = dists[0]
    lo = 0.0
    hi = math.inf
    mid = 1.0
    for _ in range(SMOOTH_MAX_ITER):
        total = float(np.sum(np.exp(-np.maximum(0.0, dists - rho) / mid)))
        if abs(total - target) < SMOOTH_TOLERANCE:
            break
        if total > target:
            hi = mid
            mid = (lo + hi) / 2.0
        else:
            lo = mid
            mid = mid * 2.0 if math.isinf(hi) else (lo + hi) / 2.0
    return max(mid, SIGMA_MIN)


def smooth_knn(graph: NeighborGraph) -> SmoothedKnn:
    """Calibrate per-node bandwidths so weight sums hit log2(k)."""
    if graph.k < 2:
        raise ValueError("smoothing requires k >= 2")
    target = math.log2(graph.k)
    n = graph.n
    rho = graph.distances[:, 0].copy()
    sigma = np.empty(n)
    for i in range(n):
        sigma[i] = _calibrate_sigma(graph.distances[i], target)
    weights = np.exp(-np.maximum(0.0, graph.distances - rho[:, None]) / sigma[:, None])
    return SmoothedKnn(graph=graph, rho=rho, sigma=sigma, weights=weights)


def fuzzy_union(smoothed: SmoothedKnn) -> FuzzyGraph:
    """Symmetrize directed weights with the probabilistic t-conorm p+q-pq."""
    graph = smoothed.graph
    directed: dict[tuple[int, int], float] = {}
    for i in range(graph.n):
        for slot in range(graph.k):
            directed[(i, int(graph.indices[i, slot]))] = float(smoothed.weights[i, slot])
    combined: dict[tuple[int, int], float] = {}
    for (i, j), p in directed.items():
        key = (i, j) if i < j else (j, i)
        if key in combined:
            continue
        q = directed.get((j, i), 0.0)
        w = p + q - p * q
        if w > 0.0:
            combined[key] = w
    keys = sorted(combined)
    return FuzzyGraph(
        n=graph.n,
        edges_i=np.array([k[0] for k in keys], dtype=np.int64),
        edges_j=np.array([k[1] for k in keys], dtype=np.int64),
        weights=np.array([combined[k] for k in keys], dtype=np.float64),
    )


def _fit_targets(min_dist: float, spread: float) -> tuple[np.ndarray, np.ndarray]:
    d = np.linspace(0.0, 3.0 * spread, 300)
    t = np.where(d <= min_dist, 1.0, np.exp(-(d - min_dist) / spread))
    return d, t


def _curve_rmse(d: np.ndarray, t: np.ndarray, a: float, b: float) -> float:
    phi = 1.0 / (1.0 + a * d ** (2.0 * b))
    return float(np.sqrt(np.mean((phi - t) ** 2)))


def fit_ab(min_dist: float, spread: float, max_iter: int = 200) -> tuple[float, float]:
    """Least-squares fit of 1/(1 + a*d^(2b)) to the offset-exponential target.

    Coarse grid search seeds a damped Gauss-Newton refinement; convergence
    is an RMSE change below 1e-8.
    """
    if not (0.0 < min_dist <= spread):
        raise ValueError("need 0 < min_dist <= spread")
    d, t = _fit_targets(min_dist, spread)
    best_rmse = math.inf
    a = b = 1.0
    for a_cand in np.geomspace(0.05, 20.0, 60):
        for b_cand in np.linspace(0.1, 2.5, 60):
            r = _curve_rmse(d, t, a_cand, b_cand)
            if r < best_rmse:
                best_rmse, a, b = r, float(a_cand), float(b_cand)

    log_d = np.zeros_like(d)
    positive = d > 0.0
    log_d[positive] = np.log(d[positive])
    prev = best_rmse
    for _ in range(max_iter):
        power = d ** (2.0 * b)
        denom = (1.0 + a * power) ** 2
        residual = 1.0 / (1.0 + a * power) - t
        grad_a = -power / denom
        grad_b = -2.0 * a * power * log_d / denom
        jac = np.stack([grad_a, grad_b], axis=1)
        lhs = jac.T @ jac + 1e-12 * np.eye(2)
        rhs = -jac.T @ residual
        step = np.linalg.solve(lhs, rhs)
        scale = 1.0
        for _ in range(30):
            a_new = a + scale * step[0]
            b_new = b + scale * step[1]
            if a_new > 0.0 and b_new > 0.0:
                r_new = _curve_rmse(d, t, a_new, b_new)
                if r_new <= prev:
                    break
            scale /= 2.0
        else:
            raise FitConvergenceError(
                f"curve fit stalled at rmse {prev:.6g}", a=a, b=b
            )
        a, b = float(a_new), float(b_new)
        if abs(prev - r_new) < 1e-8:
            return a, b
        prev = r_new
    raise FitConvergenceError(f"no convergence after {max_iter} iterations", a=a, b=b)


def _clip(value: float) -> float:
    if value > GRAD_CLIP:
        return GRAD_CLIP
    if value < -GRAD_CLIP:
        return -GRAD_CLIP
    return value


def initial_positions(n: int, rng: np.random.Generator) -> np.ndarray:
    """First RNG consumption of the layout: n uniform points in [-10, 10]^2."""
    return rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n, 2))


def optimize_layout(
    graph: FuzzyGraph, params: EmbedParams, ids: Sequence[str] | None = None
) -> Layout2D:
    """Stochastic attract/repel layout over the fuzzy graph.

    Each edge carries a schedule counter incremented by w/max_w per epoch
    and fires when it crosses 1 (remainder kept). A firing edge applies one
    attractive update (both endpoints, opposite signs), then
    negative_samples uniform repulsive updates to each endpoint in turn.
    Gradient components are clipped to [-4, 4]; the learning rate decays
    linearly to 0.

    RNG consumption order: the initial positions, then one batch of
    negative-sample indices per epoch shaped (fired edges, 2 endpoints,
    negative_samples). The firing schedule never depends on positions, so
    the batch draw keeps the stream aligned with firings.
    """
    if graph.n < 1:
        raise ValueError("graph must be non-empty")
    a, b = params.resolved_ab()
    rng = np.random.default_rng(params.seed)
    positions = initial_positions(graph.n, rng)
    if ids is None:
        ids = tuple(str(i) for i in range(graph.n))

    xs = positions[:, 0].tolist()
    ys = positions[:, 1].tolist()
    edges_i = graph.edges_i.tolist()
    edges_j = graph.edges_j.tolist()
    n_edges = graph.n_edges
    if n_edges:
        increments = graph.weights / float(np.max(graph.weights))
    else:
        increments = np.empty(0)
    counters = np.zeros(n_edges)
    n = graph.n
    n_epochs = params.n_epochs
    negative_samples = params.negative_samples
    b_minus_1 = b - 1.0
    clip = GRAD_CLIP

    for epoch in range(n_epochs):
        lr = params.initial_lr * (1.0 - epoch / n_epochs)
        counters += increments
        fired = np.nonzero(counters >= 1.0)[0]
        counters[fired] -= 1.0
        if negative_samples > 0 and len(fired):
            samples = rng.integers(0, n, size=(len(fired), 2, negative_samples)).tolist()
        else:
            samples = [[[], []]] * len(fired)

        for fire_idx, e in enumerate(fired.tolist()):
            i = edges_i[e]
            j = edges_j[e]

            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            d2 = dx * dx + dy * dy
            if d2 > 0.0:
                coeff = (-2.0 * a * b * d2**b_minus_1) / (1.0 + a * d2**b)
                gx = coeff * dx
                gy = coeff * dy
                if gx > clip:
                    gx = clip
                elif gx < -clip:
                    gx = -clip
                if gy > clip:
                    gy = clip
                elif gy < -clip:
                    gy = -clip
                xs[i] += lr * gx
                ys[i] += lr * gy
                xs[j] -= lr * gx
                ys[j] -= lr * gy

            endpoint_samples = samples[fire_idx]
            for node, node_samples in ((i, endpoint_samples[0]), (j, endpoint_samples[1])):
                x_node = xs[node]
                y_node = ys[node]
                for s in node_samples:
                    dx = x_node - xs[s]
                    dy = y_node - ys[s]
                    d2 = dx * dx + dy * dy
                    coeff = (2.0 * b) / ((REPULSION_GUARD + d2) * (1.0 + a * d2**b))
                    gx = coeff * dx
                    gy = coeff * dy
                    if gx > clip:
                        gx = clip
                    elif gx < -clip:
                        gx = -clip
                    if gy > clip:
                        gy = clip
                    elif gy < -clip:
                        gy = -clip
                    x_node += lr * gx
                    y_node += lr * gy
                xs[node] = x_node
                ys[node] = y_node

    return Layout2D(ids=tuple(ids), coordinates=np.column_stack([xs, ys]))


def embed(
    features: FeatureSet, metric: Metric, params: EmbedParams
) -> tuple[Layout2D, dict]:
    """Full projection: kNN -> smoothing -> fuzzy union -> layout.

    Returns the layout together with a provenance dict describing exactly
    how it was produced.
    """
    graph = knn_graph(features, metric, params.k)
    smoothed = smooth_knn(graph)
    fuzzy = fuzzy_union(smoothed)
    a, b = params.resolved_ab()
    resolved = replace(params, a=a, b=b)
    layout = optimize_layout(fuzzy, resolved, ids=graph.ids)
    provenance = {
        "feature_kind": features.kind.value,
        "metric": metric.value,
        "embed_params": resolved.to_json(),
    }
    return layout, provenance
