"""Glue between the log, the scoring stores, and the network.

Builds the dwell store, the user history store, and the feedback index
from sessionized logs, and packages a trainer closure for fold-wise
evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import bpnn, features, semantics
from .priority_time import TimeDb
from .textprep import DocIndex, stem_tokens


@dataclass
class Stores:
    index: DocIndex
    time_db: TimeDb
    history: semantics.UserHistoryDb
    feedback: dict[tuple[str, str], float]


def session_history_entry(session, by_id) -> semantics.HistoryEntry | None:
    """History entry for an engaged session: query stems plus the subcategory
    of the page with the strongest engagement (latest record wins ties)."""
    raw = features.session_query(session)
    if raw is None:
        return None
    tokens = stem_tokens(raw)
    if not tokens:
        return None
    best_doc = None
    best_weight = 0.0
    for record in session.records:
        w = features.EVENT_WEIGHTS[record.event_type]
        if w >= features.ENGAGEMENT_THRESHOLD and w >= best_weight:
            best_weight = w
            best_doc = record.doc_id
    if best_doc is None:
        return None
    doc = by_id.get(best_doc)
    subcategory = doc.subcategory if doc is not None else None
    return semantics.HistoryEntry(tokens=tuple(tokens), subcategory=subcategory)


def feedback_index(sessions) -> dict[tuple[str, str], float]:
    """Strongest observed event weight per (user, doc)."""
    out: dict[tuple[str, str], float] = {}
    for session in sessions:
        for record in session.records:
            key = (record.user_id, record.doc_id)
            w = features.EVENT_WEIGHTS[record.event_type]
            if w > out.get(key, 0.0):
                out[key] = w
    return out


def build_stores(catalog_or_index, sessions) -> Stores:
    """Fold the sessions into dwell, history and feedback stores."""
    if isinstance(catalog_or_index, DocIndex):
        index = catalog_or_index
    else:
        index = DocIndex(catalog_or_index)
    by_id = {d.doc_id: d for d in index.docs}

    time_db = TimeDb()
    all_records = sorted(
        (r for s in sessions for r in s.records), key=lambda r: r.timestamp
    )
    for record in all_records:
        time_db.update_dwell(
            record.doc_id,
            record.dwell_seconds,
            at=record.timestamp,
            keywords=stem_tokens(record.query),
        )

    history = semantics.UserHistoryDb()
    for session in sessions:
        entry = session_history_entry(session, by_id)
        if entry is not None:
            history.add(session.user_id, entry.tokens, entry.subcategory)

    return Stores(
        index=index,
        time_db=time_db,
        history=history,
        feedback=feedback_index(sessions),
    )


def retrieve(index: DocIndex, query) -> list:
    """All documents sharing at least one stemmed query word, id order."""
    return [index.doc(i) for i in index.candidates(query.words)]


def make_trainer(index: DocIndex, cfg: bpnn.TrainConfig, hidden_size: int = 4,
                 init_seed: int | None = None, sample_seed: int = 0):
    """Closure mapping training sessions to a trained network plus stores."""
    seed = cfg.seed if init_seed is None else init_seed

    def trainer(train_sessions):
        stores = build_stores(index, train_sessions)
        examples = features.build_training_set(
            index.docs,
            train_sessions,
            stores.time_db,
            stores.history,
            seed=sample_seed,
            index=index,
        )
        net = bpnn.init(seed, (5, hidden_size, 1))
        trained, history = bpnn.train(net, examples, cfg)
        return trained, stores, history

    return trainer
