"""Corpus ingestion: manifest parsing, genre tokenization, filtering, tag vocabulary.

The corpus arrives as a JSON-lines manifest (one band per line) plus logo
image files resolvable against an image root. Nothing here touches the
network; everything is a pure function over the parsed records.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

MANIFEST_KEYS = ("id", "name", "genre", "themes", "label", "status", "country", "logo")

#: Drop rules in evaluation order; a dropped record is attributed to the
#: first rule that rejects it.
FILTER_RULES = ("inactive", "unsigned", "no_themes", "singleton_label")

#: Label string (compared case-insensitively) that marks a band as unsigned.
UNSIGNED_LABEL = "unsigned/independent"


class ManifestError(ValueError):
    """Malformed or inconsistent manifest input."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class Status(Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: str) -> "Status":
        """Case-insensitive parse; anything unrecognized maps to UNKNOWN."""
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            return cls.UNKNOWN


@dataclass(frozen=True)
class BandRecord:
    id: str
    name: str
    genre_raw: str
    genres: frozenset[str]
    themes: frozenset[str]
    label: str | None
    status: Status
    country: str | None
    logo_path: str

    @classmethod
    def build(
        cls,
        id: str,
        name: str,
        genre_raw: str,
        themes: Iterable[str] = (),
        label: str | None = None,
        status: Status | str = Status.ACTIVE,
        country: str | None = None,
        logo_path: str = "",
    ) -> "BandRecord":
        """Construct a record with genres derived from the raw genre string."""
        if isinstance(status, str):
            status = Status.parse(status)
        return cls(
            id=id,
            name=name,
            genre_raw=genre_raw,
            genres=parse_genre_string(genre_raw),
            themes=frozenset(_normalize_tag(t) for t in themes if _normalize_tag(t)),
            label=label,
            status=status,
            country=country,
            logo_path=logo_path,
        )

    def to_manifest_json(self) -> str:
        """One manifest line; parse_manifest round-trips it."""
        return json.dumps(
            {
                "id": self.id,
                "name": self.name,
                "genre": self.genre_raw,
                "themes": sorted(self.themes),
                "label": self.label,
                "status": self.status.value,
                "country": self.country,
                "logo": self.logo_path,
            },
            ensure_ascii=False,
            sort_keys=True,
        )


@dataclass(frozen=True)
class FilterReport:
    total_in: int
    kept: int
    dropped_by_rule: Mapping[str, int]

    def to_json(self) -> dict:
        return {
            "total_in": self.total_in,
            "kept": self.kept,
            "dropped_by_rule": dict(self.dropped_by_rule),
        }


@dataclass(frozen=True)
class TagVocabulary:
    """Genre tags ordered by descending record frequency, ties lexicographic."""

    tags: tuple[str, ...]
    frequencies: tuple[int, ...]

    def __post_init__(self):
        if len(self.tags) != len(self.frequencies):
            raise ValueError("tags and frequencies must be parallel")
        if len(set(self.tags)) != len(self.tags):
            raise ValueError("duplicate tags in vocabulary")
        order = list(zip([-f for f in self.frequencies], self.tags))
        if order != sorted(order):
            raise ValueError("vocabulary must be frequency-sorted with lexicographic ties")

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, tag: str) -> bool:
        return tag in self.tags


_PAREN_GROUP = re.compile(r"\([^()]*\)")


def _normalize_tag(text: str) -> str:
    return " ".join(text.split()).lower()


def _split_top_level_commas(text: str) -> list[str]:
    """Split on commas that are not enclosed in parentheses."""
    segments = []
    depth = 0
    current = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if ch == "," and depth == 0:
            segments.append("".join(current))
            current = []
        else:
            current.append(ch)
    segments.append("".join(current))
    return segments


def parse_genre_string(text: str) -> frozenset[str]:
    """Tokenize a raw genre string into a set of normalized tags.

    Segments are split on top-level commas, parenthesized qualifiers like
    "(early)" are stripped, and each segment is split on "/". When the last
    slash token ends in a shared terminal word (e.g. "Metal" in
    "Death/Thrash Metal"), tokens missing that word have it appended.
    Unparseable fragments survive verbatim after whitespace/case
    normalization.
    """
    tags: set[str] = set()
    for segment in _split_top_level_commas(text):
        segment = _PAREN_GROUP.sub(" ", segment)
        parts = [p for p in (part.strip() for part in segment.split("/")) if p]
        if not parts:
            continue
        last_words = parts[-1].split()
        shared_suffix = last_words[-1] if len(last_words) >= 2 else None
        for part in parts:
            words = part.split()
            if shared_suffix is not None and words[-1].lower() != shared_suffix.lower():
                words.append(shared_suffix)
            tags.add(" ".join(words).lower())
    return frozenset(tags)


def _record_from_object(obj: dict, line: int) -> BandRecord:
    rid = obj["id"]
    if not isinstance(rid, str) or not rid:
        raise ManifestError("id must be a non-empty string", line=line)
    themes = obj["themes"]
    if themes is None:
        themes = []
    if not isinstance(themes, list) or any(not isinstance(t, str) for t in themes):
        raise ManifestError("themes must be an array of strings", line=line)
    for key in ("name", "genre", "status", "logo"):
        if not isinstance(obj[key], str):
            raise ManifestError(f"{key} must be a string", line=line)
    for key in ("label", "country"):
        if obj[key] is not None and not isinstance(obj[key], str):
            raise ManifestError(f"{key} must be a string or null", line=line)
    return BandRecord.build(
        id=rid,
        name=obj["name"],
        genre_raw=obj["genre"],
        themes=themes,
        label=obj["label"],
        status=obj["status"],
        country=obj["country"],
        logo_path=obj["logo"],
    )


def parse_manifest(stream: Iterable[str]) -> list[BandRecord]:
    """Parse a JSON-lines manifest into records, in file order.

    Raises ManifestError carrying the 1-based line number for malformed
    lines and for duplicate ids.
    """
    records: list[BandRecord] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON ({exc.msg})", line=lineno) from exc
        if not isinstance(obj, dict):
            raise ManifestError("record must be a JSON object", line=lineno)
        missing = [key for key in MANIFEST_KEYS if key not in obj]
        if missing:
            raise ManifestError(f"missing keys: {', '.join(missing)}", line=lineno)
        record = _record_from_object(obj, lineno)
        if record.id in seen:
            raise ManifestError(f"duplicate id {record.id!r}", line=lineno)
        seen.add(record.id)
        records.append(record)
    return records


def _first_dropping_rule(record: BandRecord, label_counts: Counter) -> str | None:
    if record.status is not Status.ACTIVE:
        return "inactive"
    if record.label is None or record.label.casefold() == UNSIGNED_LABEL:
        return "unsigned"
    if not record.themes:
        return "no_themes"
    if label_counts[record.label.casefold()] < 2:
        return "singleton_label"
    return None


def apply_filters(records: Sequence[BandRecord]) -> tuple[list[BandRecord], FilterReport]:
    """Drop unsigned/inactive/untagged bands and singleton labels.

    Label membership is counted case-insensitively over the full input in a
    first pass, so a label shared with an otherwise-dropped record still
    counts. Kept order follows input order.
    """
    label_counts: Counter = Counter(
        r.label.casefold() for r in records if r.label is not None
    )
    dropped = {rule: 0 for rule in FILTER_RULES}
    kept: list[BandRecord] = []
    for record in records:
        rule = _first_dropping_rule(record, label_counts)
        if rule is None:
            kept.append(record)
        else:
            dropped[rule] += 1
    report = FilterReport(total_in=len(records), kept=len(kept), dropped_by_rule=dropped)
    return kept, report


def build_vocabulary(records: Sequence[BandRecord], k: int) -> TagVocabulary:
    """Top-k genre tags by record frequency (a record counts a tag once)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    counts: Counter = Counter()
    for record in records:
        counts.update(record.genres)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:k]
    return TagVocabulary(
        tags=tuple(tag for tag, _ in ranked),
        frequencies=tuple(freq for _, freq in ranked),
    )


def tag_vector(record: BandRecord, vocab: TagVocabulary) -> np.ndarray:
    """Binary membership vector of the record's genres over the vocabulary."""
    if len(vocab) == 0:
        raise ValueError("vocabulary must be non-empty")
    return np.array([1.0 if tag in record.genres else 0.0 for tag in vocab.tags])
