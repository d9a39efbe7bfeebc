"""Catalog and web-log data model, log parsing, sessionization, synthetic data.

The log file format is UTF-8 newline-delimited JSON with keys
`ts`, `user`, `session`, `query`, `doc`, `dwell`, `event`; one event per
line. The catalog file is a JSON array of objects with keys
`id`, `title`, `body`, `category`, `subcategory`, `url`.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field

from .errors import DataError

EVENT_TYPES = ("view", "click", "add_to_cart", "purchase")

# Fixed catalog taxonomy: 5 top categories, 6 subcategories each.
TAXONOMY: dict[str, tuple[str, ...]] = {
    "education": (
        "textbooks", "exam-prep", "language-learning",
        "teaching", "early-childhood", "reference",
    ),
    "humanities": (
        "history", "philosophy", "sociology", "psychology", "law", "economics",
    ),
    "technology": (
        "popular-science", "computers", "architecture",
        "medicine", "agriculture", "science",
    ),
    "literature": (
        "fiction", "poetry", "essays", "biography", "classics", "mystery",
    ),
    "life": (
        "cooking", "travel", "health", "parenting", "home", "sports",
    ),
}

SUBCATEGORY_PARENT: dict[str, str] = {
    sub: cat for cat, subs in TAXONOMY.items() for sub in subs
}

# Seed vocabulary per subcategory; titles and bodies are sampled from these
# pools so that keyword retrieval against generated catalogs is meaningful.
SUBCATEGORY_WORDS: dict[str, tuple[str, ...]] = {
    "textbooks": ("algebra", "calculus", "geometry", "grammar", "physics", "chemistry", "workbook", "syllabus"),
    "exam-prep": ("exam", "practice", "tests", "scoring", "admission", "revision", "drills", "flashcards"),
    "language-learning": ("vocabulary", "phrases", "spanish", "french", "pronunciation", "fluency", "dialogue", "translation"),
    "teaching": ("classroom", "lesson", "curriculum", "pedagogy", "assessment", "students", "instruction", "mentoring"),
    "early-childhood": ("toddler", "phonics", "counting", "alphabet", "picture", "nursery", "playtime", "stories"),
    "reference": ("dictionary", "encyclopedia", "atlas", "almanac", "thesaurus", "manual", "index", "glossary"),
    "history": ("ancient", "empire", "revolution", "medieval", "dynasty", "archives", "civilization", "war"),
    "philosophy": ("ethics", "logic", "metaphysics", "stoicism", "reason", "knowledge", "virtue", "existence"),
    "sociology": ("society", "culture", "community", "inequality", "migration", "urban", "institutions", "networks"),
    "psychology": ("cognition", "behavior", "memory", "emotion", "therapy", "perception", "motivation", "habits"),
    "law": ("contracts", "courts", "justice", "statutes", "evidence", "liability", "rights", "procedure"),
    "economics": ("markets", "inflation", "trade", "capital", "labor", "finance", "growth", "policy"),
    "popular-science": ("universe", "evolution", "genome", "quantum", "climate", "discovery", "experiments", "wonders"),
    "computers": ("programming", "algorithms", "software", "processors", "databases", "coding", "compilers", "security"),
    "architecture": ("buildings", "design", "urbanism", "structures", "blueprints", "concrete", "facades", "interiors"),
    "medicine": ("anatomy", "diagnosis", "surgery", "pharmacology", "clinical", "nursing", "pathology", "immunology"),
    "agriculture": ("farming", "crops", "soil", "irrigation", "harvest", "livestock", "forestry", "orchards"),
    "science": ("laboratory", "biology", "genetics", "astronomy", "geology", "ecology", "theories", "research"),
    "fiction": ("novel", "saga", "thriller", "characters", "plot", "adventure", "romance", "drama"),
    "poetry": ("poems", "verses", "sonnets", "rhyme", "stanzas", "lyric", "haiku", "anthology"),
    "essays": ("essays", "criticism", "reflections", "commentary", "prose", "letters", "journals", "opinions"),
    "biography": ("memoir", "life", "portrait", "legacy", "journey", "famous", "leaders", "diaries"),
    "classics": ("classic", "timeless", "masterpiece", "literary", "canon", "translated", "epic", "tragedy"),
    "mystery": ("detective", "crime", "suspense", "clues", "murder", "investigation", "noir", "conspiracy"),
    "cooking": ("recipes", "baking", "kitchen", "flavors", "cuisine", "ingredients", "grilling", "desserts"),
    "travel": ("journeys", "destinations", "maps", "hiking", "islands", "cities", "wanderlust", "itinerary"),
    "health": ("fitness", "nutrition", "wellness", "yoga", "exercise", "diet", "mindfulness", "sleep"),
    "parenting": ("children", "family", "newborn", "discipline", "bonding", "teenagers", "routines", "milestones"),
    "home": ("gardening", "decor", "furniture", "renovation", "organizing", "plants", "woodworking", "cleaning"),
    "sports": ("soccer", "basketball", "training", "coaching", "athletes", "running", "championship", "tactics"),
}

GENERIC_WORDS = (
    "book", "guide", "edition", "introduction", "complete",
    "handbook", "essential", "modern", "practical", "illustrated",
)


@dataclass(frozen=True)
class WebDocument:
    """One sellable catalog page."""

    doc_id: str
    title: str
    body: str
    category: str
    subcategory: str
    url: str


@dataclass(frozen=True)
class LogRecord:
    """One user event from the web log."""

    timestamp: float
    user_id: str
    session_id: str
    query: str
    doc_id: str
    dwell_seconds: float
    event_type: str


@dataclass
class Session:
    """A user's records within one session, ordered by time."""

    user_id: str
    session_id: str
    records: list[LogRecord]
    access_sequence: list[str] = field(default_factory=list)


@dataclass
class IngestStats:
    accepted: int = 0
    skipped: int = 0


_LOG_KEYS = ("ts", "user", "session", "query", "doc", "dwell", "event")


def _record_from_obj(obj) -> LogRecord | None:
    if not isinstance(obj, dict):
        return None
    if any(k not in obj or obj[k] is None for k in _LOG_KEYS):
        return None
    ts, user, session, query, doc, dwell, event = (obj[k] for k in _LOG_KEYS)
    if not isinstance(ts, (int, float)) or isinstance(ts, bool):
        return None
    if not (isinstance(user, str) and user and isinstance(session, str) and session):
        return None
    if not isinstance(query, str):
        return None
    if not (isinstance(doc, str) and doc):
        return None
    if not isinstance(dwell, (int, float)) or isinstance(dwell, bool) or dwell < 0:
        return None
    if event not in EVENT_TYPES:
        return None
    return LogRecord(
        timestamp=float(ts),
        user_id=user,
        session_id=session,
        query=query,
        doc_id=doc,
        dwell_seconds=float(dwell),
        event_type=event,
    )


def load_log(path) -> tuple[list[LogRecord], IngestStats]:
    """Parse a newline-delimited JSON log.

    Well-formed lines become records in input order; malformed or
    incomplete lines are skipped and counted. An unreadable path raises
    the underlying OSError.
    """
    records: list[LogRecord] = []
    stats = IngestStats()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                stats.skipped += 1
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                stats.skipped += 1
                continue
            record = _record_from_obj(obj)
            if record is None:
                stats.skipped += 1
            else:
                records.append(record)
                stats.accepted += 1
    return records, stats


def record_to_line(record: LogRecord) -> str:
    return json.dumps(
        {
            "ts": record.timestamp,
            "user": record.user_id,
            "session": record.session_id,
            "query": record.query,
            "doc": record.doc_id,
            "dwell": record.dwell_seconds,
            "event": record.event_type,
        }
    )


def save_log(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_line(record) + "\n")


def sessionize(records) -> list[Session]:
    """Group records by (user, session) and order each group by timestamp.

    The access sequence is the session's doc ids in visit order with
    adjacent repeats collapsed.
    """
    groups: dict[tuple[str, str], list[LogRecord]] = {}
    for record in records:
        groups.setdefault((record.user_id, record.session_id), []).append(record)
    sessions = []
    for (user_id, session_id), recs in groups.items():
        ordered = sorted(recs, key=lambda r: r.timestamp)
        access: list[str] = []
        for r in ordered:
            if not access or access[-1] != r.doc_id:
                access.append(r.doc_id)
        sessions.append(
            Session(
                user_id=user_id,
                session_id=session_id,
                records=ordered,
                access_sequence=access,
            )
        )
    return sessions


# --- Synthetic data ----------------------------------------------------------


def _subcategory_pool(subcategory: str) -> tuple[str, ...]:
    pool = SUBCATEGORY_WORDS.get(subcategory)
    if pool is None:
        slug = re.sub(r"[^a-z0-9]+", "", subcategory.lower()) or "topic"
        pool = tuple(f"{slug}{i:02d}" for i in range(8))
    return pool


def generate_catalog(seed: int, n_books: int = 5800, taxonomy=None) -> list[WebDocument]:
    """Deterministically generate a catalog spread across every subcategory."""
    if n_books < 0:
        raise ValueError("n_books must be >= 0")
    taxonomy = taxonomy or TAXONOMY
    pairs = [(cat, sub) for cat, subs in taxonomy.items() for sub in subs]
    rng = random.Random(seed)
    docs = []
    for i in range(n_books):
        category, subcategory = pairs[i % len(pairs)]
        pool = _subcategory_pool(subcategory)
        sibling_subs = [s for s in taxonomy[category] if s != subcategory]
        title_words = rng.sample(pool, k=rng.randint(2, 3))
        if rng.random() < 0.3:
            title_words.append(rng.choice(GENERIC_WORDS))
        body_words = list(title_words)
        for _ in range(rng.randint(24, 40)):
            roll = rng.random()
            if roll < 0.70:
                body_words.append(rng.choice(pool))
            elif roll < 0.85:
                body_words.append(rng.choice(GENERIC_WORDS))
            elif roll < 0.95 and sibling_subs:
                body_words.append(rng.choice(_subcategory_pool(rng.choice(sibling_subs))))
            else:
                other_cat, other_sub = pairs[rng.randrange(len(pairs))]
                body_words.append(rng.choice(_subcategory_pool(other_sub)))
        doc_id = f"b{i:05d}"
        docs.append(
            WebDocument(
                doc_id=doc_id,
                title=" ".join(title_words).title(),
                body=" ".join(body_words),
                category=category,
                subcategory=subcategory,
                url=f"https://shop.example/{category}/{subcategory}/{doc_id}",
            )
        )
    return docs


def _corrupt_word(word: str, rng: random.Random) -> str:
    """Introduce a small typo: drop, double or swap one character."""
    if len(word) < 3:
        return word
    op = rng.randrange(3)
    i = rng.randrange(len(word) - 1)
    if op == 0:
        return word[:i] + word[i + 1 :]
    if op == 1:
        return word[: i + 1] + word[i] + word[i + 1 :]
    return word[:i] + word[i + 1] + word[i] + word[i + 2 :]


def generate_transactions(
    catalog,
    seed: int,
    n_events: int,
    n_users: int | None = None,
) -> tuple[list[LogRecord], dict[str, str]]:
    """Deterministically simulate user sessions over a catalog.

    Each synthetic user gets a planted preferred subcategory, returned as
    the ground-truth mapping. Queries sample (noisily) from preferred
    titles, dwell runs longer on preferred pages, and purchases happen
    only on preferred-subcategory pages.
    """
    if n_events < 0:
        raise ValueError("n_events must be >= 0")
    if n_events > 0 and not catalog:
        raise DataError("cannot generate events from an empty catalog")
    rng = random.Random(seed)
    if n_users is None:
        n_users = max(4, n_events // 50)
    users = [f"u{i:04d}" for i in range(n_users)]
    subcats = sorted({doc.subcategory for doc in catalog}) if catalog else []
    planted = {user: rng.choice(subcats) if subcats else "" for user in users}

    by_subcat: dict[str, list[WebDocument]] = {}
    for doc in catalog:
        by_subcat.setdefault(doc.subcategory, []).append(doc)

    records: list[LogRecord] = []
    clock = 1_600_000_000.0
    session_idx = 0
    while len(records) < n_events:
        user = users[rng.randrange(len(users))]
        preferred = planted[user]
        pref_docs = by_subcat.get(preferred, catalog)
        session_id = f"s{session_idx:06d}"
        session_idx += 1
        clock += rng.randint(60, 900)

        on_preference = rng.random() < 0.85
        if on_preference:
            anchor = rng.choice(pref_docs)
        else:
            anchor = catalog[rng.randrange(len(catalog))]
        title_words = anchor.title.lower().split()
        k = min(len(title_words), rng.randint(2, 4))
        query_words = rng.sample(title_words, k=k)
        if rng.random() < 0.15:
            j = rng.randrange(len(query_words))
            query_words[j] = _corrupt_word(query_words[j], rng)
        query = " ".join(query_words)

        for _ in range(rng.randint(2, 5)):
            if len(records) >= n_events:
                break
            if on_preference and rng.random() < 0.75:
                doc = pref_docs[rng.randrange(len(pref_docs))]
            else:
                doc = catalog[rng.randrange(len(catalog))]
            is_preferred = doc.subcategory == preferred
            if is_preferred:
                dwell = rng.uniform(45.0, 150.0)
                roll = rng.random()
                if roll < 0.12:
                    event = "purchase"
                elif roll < 0.20:
                    event = "add_to_cart"
                elif roll < 0.38:
                    event = "click"
                else:
                    event = "view"
            else:
                dwell = rng.uniform(2.0, 35.0)
                roll = rng.random()
                if roll < 0.01:
                    event = "add_to_cart"
                elif roll < 0.06:
                    event = "click"
                else:
                    event = "view"
            clock += rng.randint(5, 120)
            records.append(
                LogRecord(
                    timestamp=clock,
                    user_id=user,
                    session_id=session_id,
                    query=query,
                    doc_id=doc.doc_id,
                    dwell_seconds=round(dwell, 2),
                    event_type=event,
                )
            )
    return records, planted


# --- Catalog and ground-truth files ------------------------------------------


def save_catalog(docs, path) -> None:
    payload = [
        {
            "id": d.doc_id,
            "title": d.title,
            "body": d.body,
            "category": d.category,
            "subcategory": d.subcategory,
            "url": d.url,
        }
        for d in docs
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_catalog(path) -> list[WebDocument]:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not a valid catalog file: {exc}") from exc
    if not isinstance(payload, list):
        raise DataError(f"{path}: catalog file must be a JSON array")
    docs = []
    for i, obj in enumerate(payload):
        try:
            docs.append(
                WebDocument(
                    doc_id=obj["id"],
                    title=obj["title"],
                    body=obj["body"],
                    category=obj["category"],
                    subcategory=obj["subcategory"],
                    url=obj["url"],
                )
            )
        except (TypeError, KeyError) as exc:
            raise DataError(f"{path}: catalog entry {i} is malformed") from exc
    return docs


def save_truth(planted: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(planted, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_truth(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
