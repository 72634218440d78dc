"""Corpus-to-map engine for band logos.

Builds "maps" of a logo corpus: visual and semantic similarity, 2-D
neighbor embeddings, collision-free Hilbert-curve grids, serializable map
documents with genre backgrounds, an HTTP service for interactive
exploration, and a rating toolkit for an 18-dimension logo design space.
"""

from .corpus import (
    BandRecord,
    FilterReport,
    Status,
    TagVocabulary,
    apply_filters,
    build_vocabulary,
    parse_genre_string,
    parse_manifest,
    tag_vector,
)
from .embed import EmbedParams, FuzzyGraph, Layout2D, SmoothedKnn, embed, fit_ab, fuzzy_union, optimize_layout, smooth_knn
from .features import (
    FeatureKind,
    FeatureSet,
    RasterImage,
    color_histogram,
    grey_thumbnail,
    load_latents,
)
from .gridify import GridAssignment, assign_cells, choose_level, hilbert_d2xy, hilbert_xy2d, quantize_points
from .metrics import Metric, NeighborGraph, euclidean_distance, knn_graph, l1_distance, sokal_michener
from .atlas import BackgroundRaster, MapDocument, assemble_map, export_map, genre_background, import_map
from .doom import DIMENSIONS, RatingTable, dimension_spread, disagreement_ranking, load_ratings, logo_profile, rater_deviation
from .synth import ClassStyle, SynthSpec, synth_corpus

__version__ = "0.1.0"
