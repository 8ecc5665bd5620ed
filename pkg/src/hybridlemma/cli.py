"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or model error.
A path of ``-`` means standard input or output.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from typing import Optional, Sequence

from .archive import ArchiveError, dump_bytes, load_bytes
from .corpus import ConlluError, parse_conllu, write_conllu
from .edit_tree import format_tree
from .evalbench import AlignmentError, evaluate, throughput_bench
from .pipeline import lemmatize_corpus, train
from .rules import RuleConfig
from .selector import SelectorConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc


def _read_corpus(path: str):
    return parse_conllu(_read_text(path), source_name="<stdin>" if path == "-" else path)


def _read_model(path: str):
    try:
        if path == "-":
            data = sys.stdin.buffer.read()
        else:
            with open(path, "rb") as fh:
                data = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc.strerror}") from exc
    return load_bytes(data)


def _write(path: str, payload: str | bytes) -> None:
    try:
        if path == "-":
            if isinstance(payload, bytes):
                sys.stdout.buffer.write(payload)
                sys.stdout.buffer.flush()
            else:
                sys.stdout.write(payload)
                sys.stdout.flush()
            return
        mode = "wb" if isinstance(payload, bytes) else "w"
        with open(path, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
            fh.write(payload)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from exc


def _emit(args, record: dict, table: str) -> None:
    print(json.dumps(record, ensure_ascii=False, sort_keys=True) if args.json else table)


def cmd_train(args) -> None:
    corpus = _read_corpus(args.corpus)
    try:
        config = SelectorConfig(top_k=args.top_k, epochs=args.epochs, seed=args.seed,
                                min_tree_freq=args.min_tree_freq,
                                learning_rate=args.learning_rate,
                                feature_space_size=args.feature_space_size)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rules = RuleConfig(enable_casing=not args.no_casing,
                       enable_mark_strip=not args.no_mark_strip,
                       enable_number_trim=not args.no_number_trim)
    model = train(corpus, config, rules)
    _write(args.out, dump_bytes(model))
    record = {
        "sentences": len(corpus),
        "tokens": corpus.token_count,
        "trees": len(model.inventory),
        "lookup_entries": len(model.lookup),
        "selector_classes": model.selector.n_classes,
        "selector_features": len(model.selector.feature_ids),
    }
    table = "\n".join(f"{k}: {v}" for k, v in record.items())
    if args.out == "-":
        print(json.dumps(record, sort_keys=True) if args.json else table, file=sys.stderr)
    else:
        _emit(args, record, table)


def cmd_lemmatize(args) -> None:
    model = _read_model(args.model)
    corpus = _read_corpus(args.input)
    out = lemmatize_corpus(model, corpus, threads=args.threads)
    buf = io.StringIO()
    write_conllu(out, buf)
    _write(args.output, buf.getvalue())


def cmd_evaluate(args) -> None:
    model = _read_model(args.model)
    gold = _read_corpus(args.gold)
    report = evaluate(model, gold, threads=args.threads, top_k=args.top_k)
    _emit(args, report.to_dict(), report.format_table())


def cmd_bench(args) -> None:
    model = _read_model(args.model)
    corpus = _read_corpus(args.corpus)
    report = throughput_bench(model, corpus, runs=args.runs, threads=args.threads,
                              top_k=args.top_k)
    _emit(args, report.to_dict(), report.format_table())


def cmd_inspect(args) -> None:
    model = _read_model(args.model)
    inv = model.inventory
    if args.trees:
        rows = [{"id": i, "freq": inv.freq[i], "tree": format_tree(t)}
                for i, t in enumerate(inv.trees)]
        lines = [f"{r['id']}\t{r['freq']}\t{r['tree']}" for r in rows]
    elif args.lookup:
        rows, lines = [], []
        for key, entry in model.lookup.sorted_items():
            feats = "|".join(f"{k}={v}" for k, v in key.feats) or "_"
            tree = format_tree(inv[entry.tree_id])
            rows.append({"masked_form": key.masked_form, "upos": key.upos, "feats": feats,
                         "tree": tree, "count": entry.count, "total": entry.total})
            lines.append("\t".join([key.masked_form, key.upos, feats, tree,
                                    str(entry.count), str(entry.total)]))
    else:
        meta = json.loads(model.training_metadata) if model.training_metadata else {}
        summary = {
            "format_version": model.format_version,
            "trees": len(inv),
            "lookup_entries": len(model.lookup),
            "selector_classes": model.selector.n_classes,
            "selector_features": len(model.selector.feature_ids),
            "selector_config": vars(model.selector.config),
            "rules": vars(model.rules),
            "training_metadata": meta,
        }
        _emit(args, summary, json.dumps(summary, indent=2, ensure_ascii=False, sort_keys=True))
        return
    if args.json:
        print(json.dumps(rows, ensure_ascii=False))
    else:
        print("\n".join(lines))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridlemma", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    defaults = SelectorConfig()
    p = sub.add_parser("train", help="train a model from a CoNLL-U corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", type=int, default=defaults.top_k)
    p.add_argument("--epochs", type=int, default=defaults.epochs)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--min-tree-freq", type=int, default=defaults.min_tree_freq)
    p.add_argument("--learning-rate", type=float, default=defaults.learning_rate)
    p.add_argument("--feature-space-size", type=int, default=defaults.feature_space_size)
    p.add_argument("--no-casing", action="store_true")
    p.add_argument("--no-mark-strip", action="store_true")
    p.add_argument("--no-number-trim", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("lemmatize", help="fill the LEMMA column of a CoNLL-U file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_lemmatize)

    p = sub.add_parser("evaluate", help="lemma accuracy against a gold CoNLL-U file")
    p.add_argument("--model", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="throughput in tokens per second")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="show model contents")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--trees", action="store_true")
    group.add_argument("--lookup", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_inspect)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for name in ("threads", "runs", "top_k"):
            value = getattr(args, name, None)
            if value is not None and value < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be >= 1")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ConlluError, ArchiveError, AlignmentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
