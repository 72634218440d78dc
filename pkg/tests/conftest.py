from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make tests/oracles.py importable

from metalmap.embed import EmbedParams, FuzzyGraph, fuzzy_union, smooth_knn
from metalmap.features import FeatureKind, FeatureSet, image_features
from metalmap.metrics import Metric, knn_graph
from metalmap.synth import SynthSpec, synth_corpus

FIXTURES = Path(__file__).parent / "fixtures"

# Expected outcome of filtering tests/fixtures/manifest20.jsonl, derived by
# applying the four rules by hand (label counts over the full input,
# case-insensitive; first matching rule attributed).
MANIFEST20_KEPT = ["r01", "r02", "r06", "r07", "r11", "r13", "r16", "r18"]
MANIFEST20_DROPS = {"inactive": 4, "unsigned": 3, "no_themes": 4, "singleton_label": 1}


@pytest.fixture(scope="session")
def manifest20_path() -> Path:
    return FIXTURES / "manifest20.jsonl"


@dataclass(frozen=True)
class ClusterFixture:
    """Seeded 3-class synthetic corpus with histogram features."""

    records: list
    images: dict
    features: FeatureSet
    labels: list[int]
    graph: object
    fuzzy: FuzzyGraph
    params: EmbedParams


CLUSTER3_CORPUS_SEED = 7
CLUSTER3_EMBED_SEED = 1


@pytest.fixture(scope="session")
def cluster3() -> ClusterFixture:
    spec = SynthSpec(n_classes=3, items_per_class=100, image_size=96)
    records, images = synth_corpus(spec, seed=CLUSTER3_CORPUS_SEED)
    features = image_features(images, FeatureKind.HISTOGRAM)
    labels = [i // 100 for i in range(len(records))]
    graph = knn_graph(features, Metric.L1, 15)
    fuzzy = fuzzy_union(smooth_knn(graph))
    params = EmbedParams(seed=CLUSTER3_EMBED_SEED)
    return ClusterFixture(
        records=records,
        images=images,
        features=features,
        labels=labels,
        graph=graph,
        fuzzy=fuzzy,
        params=params,
    )


def rng_for(name: str) -> np.random.Generator:
    """Deterministic per-test generator so randomized checks reproduce."""
    import zlib

    return np.random.default_rng(zlib.crc32(name.encode("utf-8")))


def pytest_runtest_logreport(report):
    """Print one PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].replace("test_", "", 1)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {name}: {verdict}", flush=True)
