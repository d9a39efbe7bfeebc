"""Session semantics: history matching by longest common subsequence.

A user's past query token sequences are compared against the current
query; the best match carries the subcategory of the page the user
ultimately engaged in that past session, and taxonomy affinity turns
the match into a score.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .corpus import SUBCATEGORY_PARENT
from .errors import StoreFormatError


def lcs_length(a, b) -> int:
    """Longest common subsequence length via the standard dynamic program."""
    a = list(a)
    b = list(b)
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


@dataclass(frozen=True)
class HistoryEntry:
    tokens: tuple[str, ...]
    subcategory: str | None = None


@dataclass(frozen=True)
class SessionMatch:
    best_entry: HistoryEntry | None
    lcs_len: int
    similarity: float
    matched_subcategory: str | None


NO_MATCH = SessionMatch(best_entry=None, lcs_len=0, similarity=0.0, matched_subcategory=None)


class UserHistoryDb:
    """Past stemmed query sequences per user, with the engaged subcategory."""

    def __init__(self):
        self._entries: dict[str, list[HistoryEntry]] = {}

    def __len__(self) -> int:
        return sum(len(v) for v in self._entries.values())

    def users(self) -> list[str]:
        return list(self._entries)

    def add(self, user_id: str, tokens, subcategory: str | None = None) -> None:
        tokens = tuple(tokens)
        if not tokens:
            raise ValueError("history entries must have at least one token")
        self._entries.setdefault(user_id, []).append(
            HistoryEntry(tokens=tokens, subcategory=subcategory)
        )

    def entries(self, user_id: str) -> list[HistoryEntry]:
        return list(self._entries.get(user_id, ()))

    def save(self, path) -> None:
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for user_id, entries in self._entries.items():
                for entry in entries:
                    fh.write(
                        json.dumps(
                            {
                                "user": user_id,
                                "tokens": list(entry.tokens),
                                "subcategory": entry.subcategory,
                            }
                        )
                        + "\n"
                    )
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "UserHistoryDb":
        db = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    user = obj["user"]
                    tokens = tuple(obj["tokens"])
                    subcategory = obj.get("subcategory")
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise StoreFormatError(f"{path}: line {lineno}: bad history entry") from exc
                if not isinstance(user, str) or not user or not tokens:
                    raise StoreFormatError(f"{path}: line {lineno}: bad history entry")
                db.add(user, tokens, subcategory)
        return db


def match_entries(tokens, entries) -> SessionMatch:
    """Best similarity between the token sequence and any history entry.

    Similarity is lcs / max(len(a), len(b)); ties keep the earliest entry.
    """
    tokens = tuple(tokens)
    best = NO_MATCH
    for entry in entries:
        denom = max(len(tokens), len(entry.tokens))
        if denom == 0:
            continue
        length = lcs_length(tokens, entry.tokens)
        similarity = length / denom
        if similarity > best.similarity:
            best = SessionMatch(
                best_entry=entry,
                lcs_len=length,
                similarity=similarity,
                matched_subcategory=entry.subcategory,
            )
    return best


def match_session(query, user_id: str, db: UserHistoryDb) -> SessionMatch:
    return match_entries(query.words, db.entries(user_id))


def semantic_score(candidate, match: SessionMatch, parent=None) -> float:
    """Similarity weighted by taxonomy affinity of the matched subcategory.

    Affinity: 1.0 same subcategory, 0.5 same top category, else 0.
    """
    if match.matched_subcategory is None or match.similarity <= 0.0:
        return 0.0
    parent = SUBCATEGORY_PARENT if parent is None else parent
    if candidate.subcategory == match.matched_subcategory:
        affinity = 1.0
    elif candidate.category == parent.get(match.matched_subcategory):
        affinity = 0.5
    else:
        affinity = 0.0
    return match.similarity * affinity
