"""Rating toolkit for the 18-dimension logo design space.

Five typographic baseline dimensions plus thirteen logo-specific ones,
rated 1-5 per (rater, logo, dimension). The analyses are deliberately
plain descriptive statistics: per-logo profiles, disagreement rankings,
dimension discriminability (variance of per-logo means), and a bimodality
coefficient with the conventional 5/9 threshold.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np


class RatingError(ValueError):
    pass


class DimensionGroup(Enum):
    BERTIN = "bertin"
    LETTER_STYLE = "letter_style"
    WHOLE_LOGO = "whole_logo"
    GRAPHICS = "graphics"


@dataclass(frozen=True)
class DimensionDef:
    name: str
    group: DimensionGroup
    prompt: str


DIMENSIONS: tuple[DimensionDef, ...] = (
    DimensionDef("Thickness", DimensionGroup.BERTIN, "Stroke weight of the letterforms"),
    DimensionDef("Size", DimensionGroup.BERTIN, "Variation in letter size across the logo"),
    DimensionDef("Texture", DimensionGroup.BERTIN, "Amount of texture in the letter rendering"),
    DimensionDef("Orientation", DimensionGroup.BERTIN, "Departure from upright letter orientation"),
    DimensionDef("Color", DimensionGroup.BERTIN, "Breadth of the hue range"),
    DimensionDef("Novelty", DimensionGroup.LETTER_STYLE, "Originality of the letterforms"),
    DimensionDef("Angularity", DimensionGroup.LETTER_STYLE, "Angularity of the letter outlines"),
    DimensionDef("Constraints", DimensionGroup.LETTER_STYLE, "Fixedness of the letter-segment angles"),
    DimensionDef("Sharpness", DimensionGroup.LETTER_STYLE, "Prevalence of prickly, sharp elements"),
    DimensionDef("Tightness", DimensionGroup.LETTER_STYLE, "Tightness and precision of the letters"),
    DimensionDef("Symmetry", DimensionGroup.WHOLE_LOGO, "Degree of vertical-axis symmetry"),
    DimensionDef("Space", DimensionGroup.WHOLE_LOGO, "Negative space left between letters"),
    DimensionDef("Connectivity", DimensionGroup.WHOLE_LOGO, "Degree to which letters connect"),
    DimensionDef("Dimensionality", DimensionGroup.WHOLE_LOGO, "Apparent 3-D depth of the logo"),
    DimensionDef("Deviation", DimensionGroup.WHOLE_LOGO, "Departure of the lettering from the baseline"),
    DimensionDef("Congruence", DimensionGroup.GRAPHICS, "Fit of graphical elements to name and genre"),
    DimensionDef("Abstraction", DimensionGroup.GRAPHICS, "Abstractness of the graphical elements"),
    DimensionDef("Integrity", DimensionGroup.GRAPHICS, "Integration of the graphics into the logo"),
)

DIMENSION_NAMES: tuple[str, ...] = tuple(d.name for d in DIMENSIONS)
_DIMENSION_INDEX = {name: i for i, name in enumerate(DIMENSION_NAMES)}

BIMODALITY_THRESHOLD = 5.0 / 9.0

RATINGS_HEADER = ("rater", "logo", "dimension", "score")


@dataclass(frozen=True)
class RatingTable:
    """Complete rater x logo x dimension cube of 1-5 scores.

    ``scores[r, l, d]`` indexes raters/logos in sorted order and dimensions
    in canonical order. ``intended_genres`` is carried when the source CSV
    provides it and is ignored by every statistic here.
    """

    raters: tuple[str, ...]
    logos: tuple[str, ...]
    scores: np.ndarray  # (n_raters, n_logos, 18) float64
    intended_genres: dict[str, str] | None = None

    def score(self, rater: str, logo: str, dimension: str) -> int:
        r = self.raters.index(rater)
        l = self.logos.index(logo)
        return int(self.scores[r, l, _DIMENSION_INDEX[dimension]])


def load_ratings(stream: Iterable[str]) -> RatingTable:
    """Parse and validate a ratings CSV with header rater,logo,dimension,score.

    Scores must be integers in 1..5, dimensions must be the 18 canonical
    names, and the (rater, logo, dimension) cross-product must be complete.
    An optional intended_genre column (per logo) is stored but unused.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise RatingError("ratings stream is empty") from None
    header = [h.strip() for h in header]
    has_genre = header == list(RATINGS_HEADER) + ["intended_genre"]
    if header != list(RATINGS_HEADER) and not has_genre:
        raise RatingError(
            f"expected header {','.join(RATINGS_HEADER)}, got {','.join(header)}"
        )

    entries: dict[tuple[str, str, str], int] = {}
    intended: dict[str, str] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        expected_cols = 5 if has_genre else 4
        if len(row) != expected_cols:
            raise RatingError(f"line {lineno}: expected {expected_cols} columns")
        rater, logo, dimension, score_text = (cell.strip() for cell in row[:4])
        if dimension not in _DIMENSION_INDEX:
            raise RatingError(f"line {lineno}: unknown dimension {dimension!r}")
        cell = f"rater={rater}, logo={logo}, dimension={dimension}"
        try:
            score = int(score_text)
        except ValueError:
            raise RatingError(f"line {lineno}: non-integer score at {cell}") from None
        if not 1 <= score <= 5:
            raise RatingError(f"line {lineno}: score {score} out of range 1..5 at {cell}")
        key = (rater, logo, dimension)
        if key in entries:
            raise RatingError(f"line {lineno}: duplicate cell at {cell}")
        entries[key] = score
        if has_genre and row[4].strip():
            intended[logo] = row[4].strip()

    raters = tuple(sorted({k[0] for k in entries}))
    logos = tuple(sorted({k[1] for k in entries}))
    if not raters or not logos:
        raise RatingError("ratings stream has no data rows")
    missing = [
        (r, l, d)
        for r in raters
        for l in logos
        for d in DIMENSION_NAMES
        if (r, l, d) not in entries
    ]
    if missing:
        shown = "; ".join(f"rater={r}, logo={l}, dimension={d}" for r, l, d in missing[:20])
        suffix = "" if len(missing) <= 20 else f" (and {len(missing) - 20} more)"
        raise RatingError(f"incomplete cross-product, {len(missing)} missing cells: {shown}{suffix}")

    cube = np.empty((len(raters), len(logos), len(DIMENSIONS)))
    for (rater, logo, dimension), score in entries.items():
        cube[raters.index(rater), logos.index(logo), _DIMENSION_INDEX[dimension]] = score
    return RatingTable(
        raters=raters,
        logos=logos,
        scores=cube,
        intended_genres=intended or None,
    )


def _rater_sd(column: np.ndarray) -> float:
    """Standard deviation across raters with n-1 divisor; 0 for one rater."""
    if column.shape[0] < 2:
        return 0.0
    return float(np.std(column, ddof=1))


def logo_profile(table: RatingTable, logo: str) -> dict[str, tuple[float, float]]:
    """Per-dimension (mean, sd) across raters for one logo."""
    if logo not in table.logos:
        raise RatingError(f"unknown logo {logo!r}")
    l = table.logos.index(logo)
    block = table.scores[:, l, :]
    return {
        name: (float(np.mean(block[:, d])), _rater_sd(block[:, d]))
        for d, name in enumerate(DIMENSION_NAMES)
    }


def disagreement_ranking(table: RatingTable) -> list[tuple[str, float]]:
    """Logos ordered by mean per-dimension rater sd, descending, ties by id."""
    if len(table.raters) < 2:
        raise RatingError("disagreement ranking needs at least 2 raters")
    scored = []
    for l, logo in enumerate(table.logos):
        sds = [_rater_sd(table.scores[:, l, d]) for d in range(len(DIMENSIONS))]
        scored.append((logo, float(np.mean(sds))))
    return sorted(scored, key=lambda pair: (-pair[1], pair[0]))


@dataclass(frozen=True)
class DimensionSpread:
    discriminability: float
    bimodality_coefficient: float | None
    bimodal_flag: bool | None


def _bimodality(values: np.ndarray) -> tuple[float | None, bool | None]:
    n = values.shape[0]
    if n < 4:
        return None, None
    centered = values - values.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        return None, None
    g1 = float(np.mean(centered**3)) / m2**1.5
    g2 = float(np.mean(centered**4)) / m2**2 - 3.0
    coefficient = (g1**2 + 1.0) / (g2 + 3.0 * (n - 1) ** 2 / ((n - 2) * (n - 3)))
    return coefficient, coefficient > BIMODALITY_THRESHOLD


def dimension_spread(table: RatingTable) -> dict[str, DimensionSpread]:
    """Discriminability and bimodality of each dimension's per-logo means.

    Discriminability is the n-1 variance of per-logo mean scores. The
    bimodality coefficient (skewness^2 + 1 over adjusted kurtosis) is
    undefined below 4 logos or at zero variance, and flags values above
    5/9.
    """
    if len(table.logos) < 3:
        raise RatingError("dimension spread needs at least 3 logos")
    out = {}
    for d, name in enumerate(DIMENSION_NAMES):
        means = table.scores[:, :, d].mean(axis=0)
        discriminability = float(np.var(means, ddof=1))
        coefficient, flag = _bimodality(means)
        out[name] = DimensionSpread(discriminability, coefficient, flag)
    return out


def rater_deviation(table: RatingTable, rater: str) -> dict[str, float]:
    """Per-dimension mean |rater score - mean of the other raters|."""
    if rater not in table.raters:
        raise RatingError(f"unknown rater {rater!r}")
    if len(table.raters) < 2:
        raise RatingError("rater deviation needs at least 2 raters")
    r = table.raters.index(rater)
    others = [i for i in range(len(table.raters)) if i != r]
    own = table.scores[r]  # (n_logos, 18)
    rest = table.scores[others].mean(axis=0)
    return {
        name: float(np.mean(np.abs(own[:, d] - rest[:, d])))
        for d, name in enumerate(DIMENSION_NAMES)
    }


def rating_report(table: RatingTable) -> dict:
    """Full JSON-ready report keyed by logo and dimension."""
    report: dict = {
        "raters": list(table.raters),
        "logos": list(table.logos),
        "logo_profiles": {
            logo: {
                dim: {"mean": mean, "sd": sd}
                for dim, (mean, sd) in logo_profile(table, logo).items()
            }
            for logo in table.logos
        },
    }
    if len(table.raters) >= 2:
        report["disagreement_ranking"] = [
            {"logo": logo, "score": score} for logo, score in disagreement_ranking(table)
        ]
        report["rater_deviation"] = {
            rater: rater_deviation(table, rater) for rater in table.raters
        }
    if len(table.logos) >= 3:
        report["dimension_spread"] = {
            dim: {
                "discriminability": spread.discriminability,
                "bimodality_coefficient": spread.bimodality_coefficient,
                "bimodal_flag": spread.bimodal_flag,
            }
            for dim, spread in dimension_spread(table).items()
        }
    return report
