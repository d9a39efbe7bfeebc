"""Ranking by network output and the precision/recall evaluation harness."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from . import bpnn, features, priority_content, semantics
from .corpus import Session
from .errors import DataError, EmptyQueryError, UndefinedMetricError
from .pipeline import Stores, session_history_entry
from .textprep import Query, parse_query


@dataclass(frozen=True)
class RankedList:
    query: Query
    entries: tuple[tuple[str, float], ...]

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]


@dataclass
class EvalReport:
    fold: int
    seq_len: int | None
    precision: float
    recall: float
    n_users: int
    top_n: int
    r_sizes: list[int] = field(default_factory=list)
    t_sizes: list[int] = field(default_factory=list)


def _filtered_docs(query: Query, candidates, index) -> list:
    """Apply the keyword majority filter, preserving candidate order."""
    stats = [
        priority_content.count_matches(query, index.dictionary(d.doc_id, query.max_len))
        for d in candidates
    ]
    kept = {s.doc_id for s in priority_content.filter_candidates(stats)}
    return [d for d in candidates if d.doc_id in kept]


def rank(
    query: Query,
    candidates,
    stores: Stores,
    net: bpnn.BpNetwork,
    user_id: str | None = None,
    extra_feedback=None,
    extra_history=(),
) -> RankedList:
    """Score surviving candidates with the network, sort descending.

    Ties break by ascending doc id. The optional user id pulls that
    user's feedback and history into the per-candidate features;
    extra_feedback/extra_history extend them (used by the evaluator to
    model what has been observed so far).
    """
    docs = _filtered_docs(query, candidates, stores.index)
    if not docs:
        return RankedList(query=query, entries=())
    if user_id is None:
        match = semantics.NO_MATCH
        fb: dict[str, float] = {}
    else:
        entries = stores.history.entries(user_id)
        entries.extend(extra_history)
        match = semantics.match_entries(query.words, entries)
        fb = {
            d.doc_id: stores.feedback.get((user_id, d.doc_id), 0.0) for d in docs
        }
        if extra_feedback:
            for doc_id, w in extra_feedback.items():
                if w > fb.get(doc_id, 0.0):
                    fb[doc_id] = w
    vectors = features.compute_features(
        query, docs, stores.index, stores.time_db, feedback_by_doc=fb, match=match
    )
    scored = []
    for doc, vec in zip(docs, vectors):
        y, _ = bpnn.forward(net, vec.as_array())
        scored.append((doc.doc_id, float(y[0])))
    scored.sort(key=lambda e: (-e[1], e[0]))
    return RankedList(query=query, entries=tuple(scored))


# --- Metrics ------------------------------------------------------------------


def precision(recommendations, truth) -> float:
    """Summed |R(u) and T(u)| over summed |R(u)| across users."""
    hits = 0
    total = 0
    for user, recs in recommendations.items():
        recs = list(recs)
        relevant = set(truth.get(user, ()))
        hits += sum(1 for r in set(recs) if r in relevant)
        total += len(set(recs))
    if total == 0:
        raise UndefinedMetricError("precision undefined: no recommendations")
    return hits / total


def recall(recommendations, truth) -> float:
    """Summed |R(u) and T(u)| over summed |T(u)| across users."""
    hits = 0
    total = 0
    users = set(recommendations) | set(truth)
    for user in users:
        recs = set(recommendations.get(user, ()))
        relevant = set(truth.get(user, ()))
        hits += len(recs & relevant)
        total += len(relevant)
    if total == 0:
        raise UndefinedMetricError("recall undefined: no relevant items")
    return hits / total


def kfold_split(sessions, k: int, seed: int):
    """Seeded shuffle into k near-equal folds; fold i is the i-th test part."""
    sessions = list(sessions)
    if k < 2:
        raise DataError("k-fold splitting needs k >= 2")
    if len(sessions) < k:
        raise DataError(f"need at least {k} sessions for {k} folds, got {len(sessions)}")
    rng = random.Random(seed)
    order = list(range(len(sessions)))
    rng.shuffle(order)
    base = len(sessions) // k
    extra = len(sessions) % k
    parts = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        parts.append([sessions[j] for j in order[start : start + size]])
        start += size
    folds = []
    for i in range(k):
        train = [s for j, part in enumerate(parts) if j != i for s in part]
        folds.append((train, parts[i]))
    return folds


# --- Fold evaluation ----------------------------------------------------------


def _truncate_to_accesses(records, limit: int | None):
    """Prefix of the records covering at most `limit` page accesses.

    An access is a record whose doc differs from the previous record's,
    matching the adjacent-collapse rule of session access sequences.
    """
    if limit is None:
        return list(records)
    out = []
    accesses = 0
    last_doc = None
    for record in records:
        if record.doc_id != last_doc:
            accesses += 1
            if accesses > limit:
                break
            last_doc = record.doc_id
        out.append(record)
    return out


def _observed_context(user_id, observed_records, stores):
    """Query text, feedback and history derivable from observed records."""
    raws: list[str] = []
    for record in observed_records:
        q = record.query.strip()
        if q and q not in raws:
            raws.append(q)
    fb: dict[str, float] = {}
    for record in observed_records:
        w = features.EVENT_WEIGHTS[record.event_type]
        if w > fb.get(record.doc_id, 0.0):
            fb[record.doc_id] = w
    by_session: dict[str, list] = {}
    for record in observed_records:
        by_session.setdefault(record.session_id, []).append(record)
    by_id = {d.doc_id: d for d in stores.index.docs}
    extra_history = []
    for session_records in by_session.values():
        pseudo = Session(
            user_id=user_id,
            session_id=session_records[0].session_id,
            records=session_records,
        )
        entry = session_history_entry(pseudo, by_id)
        if entry is not None:
            extra_history.append(entry)
    return " ".join(raws), fb, extra_history


def evaluate_fold(
    net: bpnn.BpNetwork,
    stores: Stores,
    test_sessions,
    top_n: int = 10,
    seq_len: int | None = None,
    fold: int = 0,
    ranker: str = "net",
    shuffle_seed: int = 0,
) -> EvalReport:
    """Precision/recall of top-n recommendations for the fold's test users.

    Each user's observed history is their test records truncated to the
    first seq_len page accesses (all of them when seq_len is None); the
    query, feedback and history context come from that prefix. Ground
    truth is the user's purchased docs across the whole test fold; users
    without purchases are not scored.
    """
    by_user: dict[str, list] = {}
    for session in test_sessions:
        by_user.setdefault(session.user_id, []).extend(session.records)
    rng = random.Random(shuffle_seed)
    recs: dict[str, list[str]] = {}
    truth: dict[str, set[str]] = {}
    for user in sorted(by_user):
        records = sorted(by_user[user], key=lambda r: r.timestamp)
        purchases = {r.doc_id for r in records if r.event_type == "purchase"}
        if not purchases:
            continue
        observed = _truncate_to_accesses(records, seq_len)
        raw_query, fb, extra_history = _observed_context(user, observed, stores)
        try:
            query = parse_query(raw_query)
        except EmptyQueryError:
            continue
        candidates = [stores.index.doc(i) for i in stores.index.candidates(query.words)]
        if ranker == "net":
            ranked = rank(
                query,
                candidates,
                stores,
                net,
                user_id=user,
                extra_feedback=fb,
                extra_history=extra_history,
            )
            top = ranked.doc_ids()[:top_n]
        elif ranker == "random":
            docs = _filtered_docs(query, candidates, stores.index)
            ids = [d.doc_id for d in docs]
            rng.shuffle(ids)
            top = ids[:top_n]
        else:
            raise ValueError(f"unknown ranker {ranker!r}")
        if not top:
            continue
        recs[user] = top
        truth[user] = purchases
    if not recs:
        raise DataError("no evaluable users in the test fold")
    return EvalReport(
        fold=fold,
        seq_len=seq_len,
        precision=precision(recs, truth),
        recall=recall(recs, truth),
        n_users=len(recs),
        top_n=top_n,
        r_sizes=[len(recs[u]) for u in sorted(recs)],
        t_sizes=[len(truth[u]) for u in sorted(recs)],
    )


def sweep_sequence_length(
    sessions,
    trainer,
    lengths,
    top_n: int = 10,
    k: int = 5,
    seed: int = 0,
) -> list[EvalReport]:
    """Per-fold evaluation restricted to growing access-sequence prefixes.

    trainer maps a list of training sessions to (net, stores, ...).
    Reports come back ordered by fold, then by the given lengths.
    """
    lengths = list(lengths)
    if not lengths:
        raise ValueError("lengths must be non-empty")
    reports = []
    for fold, (train_sessions, test_sessions) in enumerate(kfold_split(sessions, k, seed)):
        trained = trainer(train_sessions)
        net, stores = trained[0], trained[1]
        for length in lengths:
            reports.append(
                evaluate_fold(
                    net,
                    stores,
                    test_sessions,
                    top_n=top_n,
                    seq_len=length,
                    fold=fold,
                )
            )
    return reports


# --- Report output ------------------------------------------------------------


def reports_to_json(reports) -> str:
    payload = [
        {
            "fold": r.fold,
            "seq_len": r.seq_len,
            "precision": r.precision,
            "recall": r.recall,
            "n_users": r.n_users,
            "top_n": r.top_n,
        }
        for r in reports
    ]
    return json.dumps(payload, indent=1) + "\n"


def format_table(reports) -> str:
    lines = [f"{'fold':>4}  {'seq_len':>7}  {'precision':>9}  {'recall':>9}  {'users':>5}"]
    for r in reports:
        seq = "full" if r.seq_len is None else str(r.seq_len)
        lines.append(
            f"{r.fold:>4}  {seq:>7}  {r.precision:>9.4f}  {r.recall:>9.4f}  {r.n_users:>5}"
        )
    return "\n".join(lines)
