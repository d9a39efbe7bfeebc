"""The five network inputs per (query, candidate) pair.

Fixed input order: content, time, feedback, semantic, deviation. All
components are normalized into [0, 1] before they reach the network.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import priority_content, priority_time, semantics
from .errors import EmptyQueryError
from .textprep import DocIndex, Query, WebDictionary, parse_query

EVENT_WEIGHTS = {"view": 0.25, "click": 0.5, "add_to_cart": 0.75, "purchase": 1.0}

# Minimum event weight that counts as engagement (click or stronger).
ENGAGEMENT_THRESHOLD = 0.5


@dataclass(frozen=True)
class FeatureVector:
    content: float
    time: float
    feedback: float
    semantic: float
    deviation: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.content, self.time, self.feedback, self.semantic, self.deviation)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)


@dataclass(frozen=True)
class LabeledExample:
    features: FeatureVector
    target: float


def feedback_score(events) -> float:
    """Strongest engagement weight among the events, 0 when there are none."""
    best = 0.0
    for event in events:
        best = max(best, EVENT_WEIGHTS[event.event_type])
    return best


@lru_cache(maxsize=None)
def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance (insert, delete, substitute all cost 1)."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i in range(1, len(a) + 1):
        cur = [i] + [0] * len(b)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            cost = 0 if ai == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[len(b)]


def deviation_score(query: Query, dictionary: WebDictionary) -> float:
    """Mean normalized edit distance from each query word to its nearest stem.

    Per word: min over dictionary stems of lev(w, s) / max(|w|, |s|).
    An exact member contributes 0; an empty dictionary scores 1.0.
    """
    if not query.words:
        raise ValueError("query has no words")
    if not dictionary.stems:
        return 1.0
    total = 0.0
    for word in query.words:
        if word in dictionary.stems:
            continue
        best = 1.0
        wlen = len(word)
        for stem in dictionary.stems:
            longer = max(wlen, len(stem))
            if abs(wlen - len(stem)) / longer >= best:
                continue
            ratio = edit_distance(word, stem) / longer
            if ratio < best:
                best = ratio
        total += best
    return total / len(query.words)


def assemble(content, time, feedback, semantic, deviation) -> FeatureVector:
    """Clamp the five components into [0, 1] in their fixed order."""
    values = (content, time, feedback, semantic, deviation)
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"non-finite feature input: {values!r}")
    clamped = tuple(min(1.0, max(0.0, float(v))) for v in values)
    return FeatureVector(*clamped)


def compute_features(
    query: Query,
    docs,
    index: DocIndex,
    time_db: priority_time.TimeDb,
    feedback_by_doc=None,
    match: semantics.SessionMatch = semantics.NO_MATCH,
    stats_by_id=None,
) -> list[FeatureVector]:
    """Feature vectors for every candidate document, in input order."""
    docs = list(docs)
    if not docs:
        return []
    feedback_by_doc = feedback_by_doc or {}
    t_scores = priority_time.time_scores([d.doc_id for d in docs], time_db)
    out = []
    for doc in docs:
        dictionary = index.dictionary(doc.doc_id, query.max_len)
        if stats_by_id is not None and doc.doc_id in stats_by_id:
            stats = stats_by_id[doc.doc_id]
        else:
            stats = priority_content.count_matches(query, dictionary)
        out.append(
            assemble(
                content=priority_content.content_score(stats),
                time=t_scores[doc.doc_id],
                feedback=feedback_by_doc.get(doc.doc_id, 0.0),
                semantic=semantics.semantic_score(doc, match),
                deviation=deviation_score(query, dictionary),
            )
        )
    return out


def session_query(session) -> str | None:
    """The first non-empty raw query of a session, if any."""
    for record in session.records:
        if record.query.strip():
            return record.query
    return None


def engagement_by_doc(records) -> dict[str, float]:
    """Strongest event weight per visited doc, keyed in first-visit order."""
    weights: dict[str, float] = {}
    for record in records:
        w = EVENT_WEIGHTS[record.event_type]
        if w > weights.get(record.doc_id, 0.0):
            weights[record.doc_id] = w
    return weights


def build_training_set(
    catalog,
    sessions,
    time_db: priority_time.TimeDb,
    history_db: semantics.UserHistoryDb,
    seed: int = 0,
    negatives_per_positive: int = 3,
    index: DocIndex | None = None,
) -> list[LabeledExample]:
    """Labeled examples from engaged pages plus sampled non-visited candidates.

    Engaged (click or stronger) pages take their event weight as target;
    sampled candidates the user never visited get 0. Deterministic for a
    fixed seed.
    """
    if index is None:
        index = DocIndex(catalog)
    rng = random.Random(seed)
    all_ids = sorted(index._docs)
    feedback_all: dict[tuple[str, str], float] = {}
    for session in sessions:
        for record in session.records:
            key = (record.user_id, record.doc_id)
            w = EVENT_WEIGHTS[record.event_type]
            if w > feedback_all.get(key, 0.0):
                feedback_all[key] = w

    examples: list[LabeledExample] = []
    for session in sessions:
        raw = session_query(session)
        if raw is None:
            continue
        try:
            query = parse_query(raw)
        except EmptyQueryError:
            continue
        visited = engagement_by_doc(session.records)
        positives = [
            (doc_id, w) for doc_id, w in visited.items() if w >= ENGAGEMENT_THRESHOLD
        ]
        if not positives:
            continue

        pool = [i for i in index.candidates(query.words) if i not in visited]
        wanted = negatives_per_positive * len(positives)
        if len(pool) >= wanted:
            negative_ids = rng.sample(pool, k=wanted)
        else:
            negative_ids = list(pool)
            extra = [i for i in all_ids if i not in visited and i not in pool]
            short = wanted - len(negative_ids)
            if extra:
                negative_ids.extend(rng.sample(extra, k=min(short, len(extra))))

        match = semantics.match_entries(query.words, history_db.entries(session.user_id))
        doc_ids = [doc_id for doc_id, _ in positives] + negative_ids
        docs = [index.doc(i) for i in doc_ids]
        fb = {
            i: feedback_all.get((session.user_id, i), 0.0) for i in doc_ids
        }
        vectors = compute_features(
            query, docs, index, time_db, feedback_by_doc=fb, match=match
        )
        targets = [w for _, w in positives] + [0.0] * len(negative_ids)
        examples.extend(
            LabeledExample(features=v, target=t) for v, t in zip(vectors, targets)
        )
    return examples


def save_training_set(examples, path) -> None:
    """Optional dump: one JSON object per line with keys `f` and `y`."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps({"f": list(ex.features.as_tuple()), "y": ex.target}) + "\n")
