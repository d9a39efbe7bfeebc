"""Time consumption priority: per-page dwell statistics and scoring.

Every visit folds into a running pairwise average: a fresh (or zero)
entry takes the observed dwell outright, otherwise the average moves
halfway toward the new observation. The store persists as
newline-delimited JSON with keys `doc`, `avg_dwell`, `ts`, `keywords`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import StoreFormatError


@dataclass
class TimeEntry:
    doc_id: str
    avg_dwell: float
    last_updated: float
    keywords: set[str] = field(default_factory=set)


class TimeDb:
    """Single-writer store of dwell statistics keyed by doc id."""

    def __init__(self):
        self._entries: dict[str, TimeEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._entries

    def get(self, doc_id: str) -> TimeEntry | None:
        return self._entries.get(doc_id)

    def avg_dwell(self, doc_id: str) -> float:
        entry = self._entries.get(doc_id)
        return entry.avg_dwell if entry is not None else 0.0

    def entries(self) -> list[TimeEntry]:
        return sorted(self._entries.values(), key=lambda e: e.doc_id)

    def update_dwell(self, doc_id: str, dwell_seconds: float, at: float, keywords=()) -> None:
        """Fold one observed dwell into the page's running average."""
        if dwell_seconds < 0:
            raise ValueError(f"negative dwell {dwell_seconds!r} for {doc_id!r}")
        entry = self._entries.get(doc_id)
        if entry is None:
            self._entries[doc_id] = TimeEntry(
                doc_id=doc_id,
                avg_dwell=float(dwell_seconds),
                last_updated=float(at),
                keywords=set(keywords),
            )
            return
        if entry.avg_dwell == 0:
            entry.avg_dwell = float(dwell_seconds)
        else:
            entry.avg_dwell = (float(dwell_seconds) + entry.avg_dwell) / 2.0
        entry.last_updated = float(at)
        entry.keywords |= set(keywords)

    def save(self, path) -> None:
        """Atomic write: serialize to a sibling temp file, then rename."""
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for entry in self.entries():
                fh.write(
                    json.dumps(
                        {
                            "doc": entry.doc_id,
                            "avg_dwell": entry.avg_dwell,
                            "ts": entry.last_updated,
                            "keywords": sorted(entry.keywords),
                        }
                    )
                    + "\n"
                )
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "TimeDb":
        """Load a store; any malformed line aborts with no partial result."""
        db = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    doc_id = obj["doc"]
                    avg = float(obj["avg_dwell"])
                    ts = float(obj["ts"])
                    keywords = set(obj["keywords"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise StoreFormatError(f"{path}: line {lineno}: bad time entry") from exc
                if not isinstance(doc_id, str) or not doc_id or avg < 0:
                    raise StoreFormatError(f"{path}: line {lineno}: bad time entry")
                db._entries[doc_id] = TimeEntry(
                    doc_id=doc_id, avg_dwell=avg, last_updated=ts, keywords=keywords
                )
        return db


def time_scores(candidates, db: TimeDb) -> dict[str, float]:
    """Min-max normalize average dwell over a candidate set.

    Missing pages count as zero dwell; if every candidate ties, all get
    the neutral 0.5.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("time scoring requires a non-empty candidate set")
    values = {doc_id: db.avg_dwell(doc_id) for doc_id in candidates}
    lo = min(values.values())
    hi = max(values.values())
    if hi == lo:
        return {doc_id: 0.5 for doc_id in values}
    span = hi - lo
    return {doc_id: (v - lo) / span for doc_id, v in values.items()}


def time_score(doc_id: str, candidates, db: TimeDb) -> float:
    scores = time_scores(candidates, db)
    if doc_id not in scores:
        raise ValueError(f"{doc_id!r} is not in the candidate set")
    return scores[doc_id]
