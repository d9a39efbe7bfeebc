"""Content priority: keyword hit counting and majority filtering."""

from __future__ import annotations

from dataclasses import dataclass

from .textprep import Query, WebDictionary


@dataclass(frozen=True)
class ContentStats:
    """Counts of query stems present in / absent from a document dictionary."""

    doc_id: str
    found: int
    missing: int


def count_matches(query: Query, dictionary: WebDictionary) -> ContentStats:
    if not query.words:
        raise ValueError("query has no words")
    found = sum(1 for w in query.words if w in dictionary.stems)
    return ContentStats(
        doc_id=dictionary.doc_id, found=found, missing=len(query.words) - found
    )


def filter_candidates(stats: list[ContentStats]) -> list[ContentStats]:
    """Drop candidates whose misses strictly outnumber their hits."""
    return [s for s in stats if s.missing <= s.found]


def content_score(stats: ContentStats) -> float:
    """Fraction of query keywords found in the document, in [0, 1]."""
    total = stats.found + stats.missing
    if total < 1:
        raise ValueError("content score requires at least one query word")
    return stats.found / total
