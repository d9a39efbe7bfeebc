"""Query and document text preparation.

Tokenizing, suffix stemming, query length bounds, and per-document
keyword dictionaries capped by the query's longest word.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptyQueryError

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_VOWELS = frozenset("aeiou")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs, keeping first occurrences only."""
    seen: dict[str, None] = {}
    for tok in _TOKEN_RE.findall(text.lower()):
        seen.setdefault(tok)
    return list(seen)


# --- Porter suffix stripping -------------------------------------------------
#
# Classic rule-driven stemmer for English. Within each step only the
# longest matching suffix is considered; if its condition fails, the
# step does nothing. Letters are classed as vowel/consonant with the
# usual rule that "y" after a consonant counts as a vowel.


def _letter_types(word: str) -> str:
    types = []
    for i, ch in enumerate(word):
        if ch in _VOWELS or (ch == "y" and i > 0 and types[i - 1] == "c"):
            types.append("v")
        else:
            types.append("c")
    return "".join(types)


def _measure(stem_part: str) -> int:
    """Count vowel-to-consonant transitions (the m of the rule conditions)."""
    types = _letter_types(stem_part)
    return sum(
        1 for i in range(len(types) - 1) if types[i] == "v" and types[i + 1] == "c"
    )


def _has_vowel(stem_part: str) -> bool:
    return "v" in _letter_types(stem_part)


def _ends_double_consonant(stem_part: str) -> bool:
    return (
        len(stem_part) >= 2
        and stem_part[-1] == stem_part[-2]
        and _letter_types(stem_part)[-1] == "c"
    )


def _ends_cvc(stem_part: str) -> bool:
    # consonant-vowel-consonant ending where the last consonant is not w, x or y
    return (
        len(stem_part) >= 3
        and _letter_types(stem_part)[-3:] == "cvc"
        and stem_part[-1] not in "wxy"
    )


def _longest_rule(word: str, rules: tuple[tuple[str, str], ...]):
    best = None
    for suffix, repl in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    return best


_STEP2_RULES = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3_RULES = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4_SUFFIXES = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b_fixup(stem_part: str) -> str:
    if stem_part.endswith(("at", "bl", "iz")):
        return stem_part + "e"
    if _ends_double_consonant(stem_part) and stem_part[-1] not in "lsz":
        return stem_part[:-1]
    if _measure(stem_part) == 1 and _ends_cvc(stem_part):
        return stem_part + "e"
    return stem_part


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    for suffix in ("ed", "ing"):
        if word.endswith(suffix):
            stem_part = word[: -len(suffix)]
            if _has_vowel(stem_part):
                return _step1b_fixup(stem_part)
            return word
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def _step2(word: str) -> str:
    rule = _longest_rule(word, _STEP2_RULES)
    if rule is None:
        return word
    stem_part = word[: -len(rule[0])]
    if _measure(stem_part) > 0:
        return stem_part + rule[1]
    return word


def _step3(word: str) -> str:
    rule = _longest_rule(word, _STEP3_RULES)
    if rule is None:
        return word
    stem_part = word[: -len(rule[0])]
    if _measure(stem_part) > 0:
        return stem_part + rule[1]
    return word


def _step4(word: str) -> str:
    rule = _longest_rule(word, tuple((s, "") for s in _STEP4_SUFFIXES))
    if rule is None:
        return word
    suffix = rule[0]
    stem_part = word[: -len(suffix)]
    if _measure(stem_part) <= 1:
        return word
    if suffix == "ion" and not stem_part.endswith(("s", "t")):
        return word
    return stem_part


def _step5(word: str) -> str:
    if word.endswith("e"):
        stem_part = word[:-1]
        m = _measure(stem_part)
        if m > 1 or (m == 1 and not _ends_cvc(stem_part)):
            word = stem_part
    if word.endswith("ll") and _measure(word) > 1:
        word = word[:-1]
    return word


def stem(word: str) -> str:
    """Reduce an English word to its stem; words of length <= 2 pass through."""
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _step2(word)
    word = _step3(word)
    word = _step4(word)
    word = _step5(word)
    return word


def stem_tokens(text: str) -> list[str]:
    """Tokenize then stem, keeping distinct stems in first-occurrence order."""
    stems: list[str] = []
    for tok in tokenize(text):
        st = stem(tok)
        if st and st not in stems:
            stems.append(st)
    return stems


# --- Queries and document dictionaries ---------------------------------------


@dataclass(frozen=True)
class Query:
    """A preprocessed search string with its keyword length bounds."""

    raw: str
    words: tuple[str, ...]
    min_len: int
    max_len: int


def parse_query(raw: str) -> Query:
    """Tokenize and stem a raw search string; record min/max stem lengths."""
    words = stem_tokens(raw)
    if not words:
        raise EmptyQueryError(f"no usable keywords in query {raw!r}")
    lengths = [len(w) for w in words]
    return Query(raw=raw, words=tuple(words), min_len=min(lengths), max_len=max(lengths))


@dataclass(frozen=True)
class WebDictionary:
    """The distinct stems of one document, capped at a maximum word length."""

    doc_id: str
    stems: frozenset[str]

    def __contains__(self, word: str) -> bool:
        return word in self.stems

    def __len__(self) -> int:
        return len(self.stems)


def build_dictionary(doc, max_len: int) -> WebDictionary:
    """Stems of the document's title and body no longer than max_len."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    stems = frozenset(
        s for s in stem_tokens(doc.title + " " + doc.body) if len(s) <= max_len
    )
    return WebDictionary(doc_id=doc.doc_id, stems=stems)


class DocIndex:
    """Per-document stem cache plus an inverted keyword index over a catalog."""

    def __init__(self, docs: Iterable):
        self._docs = {}
        self._stems: dict[str, tuple[str, ...]] = {}
        self._postings: dict[str, list[str]] = {}
        self._dict_cache: dict[tuple[str, int], WebDictionary] = {}
        for doc in docs:
            self._docs[doc.doc_id] = doc
            stems = tuple(stem_tokens(doc.title + " " + doc.body))
            self._stems[doc.doc_id] = stems
            for s in stems:
                self._postings.setdefault(s, []).append(doc.doc_id)

    def __len__(self) -> int:
        return len(self._docs)

    def doc(self, doc_id: str):
        return self._docs[doc_id]

    @property
    def docs(self) -> list:
        return list(self._docs.values())

    def stems(self, doc_id: str) -> tuple[str, ...]:
        return self._stems[doc_id]

    def dictionary(self, doc_id: str, max_len: int) -> WebDictionary:
        key = (doc_id, max_len)
        cached = self._dict_cache.get(key)
        if cached is None:
            stems = frozenset(s for s in self._stems[doc_id] if len(s) <= max_len)
            cached = WebDictionary(doc_id=doc_id, stems=stems)
            self._dict_cache[key] = cached
        return cached

    def candidates(self, words: Iterable[str]) -> list[str]:
        """Doc ids sharing at least one stem with the given words, sorted."""
        hits: set[str] = set()
        for w in words:
            hits.update(self._postings.get(w, ()))
        return sorted(hits)
