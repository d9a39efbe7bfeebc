"""Command-line surface: synth, train, rank, eval.

Exit codes: 0 success, 2 I/O error, 3 insufficient data, 4 bad query or
arguments. Every command prints the effective seed so runs are
reproducible. A config file of `key = value` lines supplies defaults;
explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from . import bpnn, corpus, features, pipeline, rank_eval
from .errors import DataError, EmptyQueryError, ModelFormatError, StoreFormatError
from .textprep import DocIndex, parse_query

EXIT_OK = 0
EXIT_IO = 2
EXIT_DATA = 3
EXIT_QUERY = 4

_DEFAULTS = {
    "seed": 0,
    "books": 5800,
    "events": 6400,
    "users": None,
    "out": ".",
    "catalog": "catalog.json",
    "log": "log.ndjson",
    "truth": "truth.json",
    "model": "model.json",
    "time_db": "time_db.ndjson",
    "history": "history.ndjson",
    "report": "eval_report.json",
    "top_n": 10,
    "hidden": 4,
    "lr": 0.1,
    "epochs": 500,
    "folds": 5,
    "lengths": "2,4,6,8",
    "user": None,
    "query": None,
    "dump_training": None,
}

_INT_KEYS = {"seed", "books", "events", "users", "top_n", "hidden", "epochs", "folds"}
_FLOAT_KEYS = {"lr"}


@dataclass
class RunConfig:
    """Merged command configuration: defaults, then config file, then flags."""

    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None


def _parse_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}: line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return value


def merge_config(args: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    if getattr(args, "config", None):
        for key, value in _parse_config_file(args.config).items():
            if key in values:
                values[key] = _coerce(key, value)
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig(values=values)


def _parse_lengths(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        lengths = [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise DataError(f"bad lengths value {text!r}") from exc
    if not lengths or any(v < 1 for v in lengths):
        raise DataError(f"bad lengths value {text!r}")
    return lengths


# --- Commands ------------------------------------------------------------------


def cmd_synth(cfg: RunConfig) -> int:
    print(f"seed: {cfg.seed}")
    catalog = corpus.generate_catalog(cfg.seed, cfg.books)
    records, planted = corpus.generate_transactions(
        catalog, cfg.seed, cfg.events, cfg.users
    )
    os.makedirs(cfg.out, exist_ok=True)
    catalog_path = os.path.join(cfg.out, "catalog.json")
    log_path = os.path.join(cfg.out, "log.ndjson")
    truth_path = os.path.join(cfg.out, "truth.json")
    corpus.save_catalog(catalog, catalog_path)
    corpus.save_log(records, log_path)
    corpus.save_truth(planted, truth_path)
    print(f"documents: {len(catalog)} -> {catalog_path}")
    print(f"events: {len(records)} -> {log_path}")
    print(f"users: {len(planted)} -> {truth_path}")
    return EXIT_OK


def _load_sessions(cfg: RunConfig):
    catalog = corpus.load_catalog(cfg.catalog)
    records, stats = corpus.load_log(cfg.log)
    sessions = corpus.sessionize(records)
    print(f"ingested: {stats.accepted} records, {stats.skipped} skipped, "
          f"{len(sessions)} sessions")
    return catalog, sessions


def cmd_train(cfg: RunConfig) -> int:
    print(f"seed: {cfg.seed}")
    catalog, sessions = _load_sessions(cfg)
    index = DocIndex(catalog)
    stores = pipeline.build_stores(index, sessions)
    examples = features.build_training_set(
        catalog, sessions, stores.time_db, stores.history, seed=cfg.seed, index=index
    )
    if not examples:
        print("error: training set is empty", file=sys.stderr)
        return EXIT_DATA
    if cfg.dump_training:
        features.save_training_set(examples, cfg.dump_training)
    net = bpnn.init(cfg.seed, (5, cfg.hidden, 1))
    train_cfg = bpnn.TrainConfig(learning_rate=cfg.lr, epochs=cfg.epochs, seed=cfg.seed)
    net, history = bpnn.train(net, examples, train_cfg)
    bpnn.save_model(net, cfg.model)
    stores.time_db.save(cfg.time_db)
    stores.history.save(cfg.history)
    print(f"examples: {len(examples)}")
    if history:
        print(f"loss: first epoch {history[0]:.6f}, last epoch {history[-1]:.6f}")
    else:
        print("loss: no epochs run")
    print(f"model -> {cfg.model}")
    return EXIT_OK


def _load_stores(cfg: RunConfig) -> pipeline.Stores:
    catalog = corpus.load_catalog(cfg.catalog)
    index = DocIndex(catalog)
    time_db = pipeline.TimeDb.load(cfg.time_db)
    history = pipeline.semantics.UserHistoryDb.load(cfg.history)
    feedback = {}
    if os.path.exists(cfg.log):
        records, _ = corpus.load_log(cfg.log)
        feedback = pipeline.feedback_index(corpus.sessionize(records))
    return pipeline.Stores(
        index=index, time_db=time_db, history=history, feedback=feedback
    )


def cmd_rank(cfg: RunConfig) -> int:
    if not cfg.query or not str(cfg.query).strip():
        print("error: empty query", file=sys.stderr)
        return EXIT_QUERY
    print(f"seed: {cfg.seed}")
    stores = _load_stores(cfg)
    net = bpnn.load_model(cfg.model)
    try:
        query = parse_query(str(cfg.query))
    except EmptyQueryError:
        print(f"error: no usable keywords in query {cfg.query!r}", file=sys.stderr)
        return EXIT_QUERY
    candidates = pipeline.retrieve(stores.index, query)
    ranked = rank_eval.rank(query, candidates, stores, net, user_id=cfg.user)
    for pos, (doc_id, score) in enumerate(ranked.entries[: cfg.top_n], start=1):
        doc = stores.index.doc(doc_id)
        print(f"{pos:>3}  {doc_id}  {score:.6f}  {doc.title}")
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    print(f"seed: {cfg.seed}")
    catalog, sessions = _load_sessions(cfg)
    lengths = _parse_lengths(cfg.lengths)
    index = DocIndex(catalog)
    train_cfg = bpnn.TrainConfig(learning_rate=cfg.lr, epochs=cfg.epochs, seed=cfg.seed)
    trainer = pipeline.make_trainer(index, train_cfg, hidden_size=cfg.hidden)
    reports: list[rank_eval.EvalReport] = []
    folds = rank_eval.kfold_split(sessions, cfg.folds, cfg.seed)
    for fold_idx, (train_sessions, test_sessions) in enumerate(folds):
        net, stores, _ = trainer(train_sessions)
        reports.append(
            rank_eval.evaluate_fold(
                net, stores, test_sessions, top_n=cfg.top_n, fold=fold_idx
            )
        )
        for length in lengths:
            reports.append(
                rank_eval.evaluate_fold(
                    net, stores, test_sessions,
                    top_n=cfg.top_n, seq_len=length, fold=fold_idx,
                )
            )
    with open(cfg.report, "w", encoding="utf-8") as fh:
        fh.write(rank_eval.reports_to_json(reports))
    print(rank_eval.format_table(reports))
    print(f"report -> {cfg.report}")
    return EXIT_OK


# --- Entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecomrank",
        description="Rank catalog pages from mined web logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int)

    p_synth = sub.add_parser("synth", help="generate a synthetic catalog and log")
    common(p_synth)
    p_synth.add_argument("--books", type=int)
    p_synth.add_argument("--events", type=int)
    p_synth.add_argument("--users", type=int)
    p_synth.add_argument("--out")

    p_train = sub.add_parser("train", help="build stores and train the ranking model")
    common(p_train)
    p_train.add_argument("--catalog")
    p_train.add_argument("--log")
    p_train.add_argument("--model")
    p_train.add_argument("--time-db", dest="time_db")
    p_train.add_argument("--history")
    p_train.add_argument("--hidden", type=int)
    p_train.add_argument("--lr", type=float)
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--dump-training", dest="dump_training")

    p_rank = sub.add_parser("rank", help="rank catalog pages for a query")
    common(p_rank)
    p_rank.add_argument("--query", required=True)
    p_rank.add_argument("--user")
    p_rank.add_argument("--catalog")
    p_rank.add_argument("--log")
    p_rank.add_argument("--model")
    p_rank.add_argument("--time-db", dest="time_db")
    p_rank.add_argument("--history")
    p_rank.add_argument("--top-n", dest="top_n", type=int)

    p_eval = sub.add_parser("eval", help="k-fold evaluation plus sequence-length sweep")
    common(p_eval)
    p_eval.add_argument("--catalog")
    p_eval.add_argument("--log")
    p_eval.add_argument("--report")
    p_eval.add_argument("--folds", type=int)
    p_eval.add_argument("--lengths")
    p_eval.add_argument("--top-n", dest="top_n", type=int)
    p_eval.add_argument("--hidden", type=int)
    p_eval.add_argument("--lr", type=float)
    p_eval.add_argument("--epochs", type=int)

    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "rank": cmd_rank,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
        return _COMMANDS[args.command](cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (StoreFormatError, ModelFormatError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EmptyQueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY


if __name__ == "__main__":
    raise SystemExit(main())
