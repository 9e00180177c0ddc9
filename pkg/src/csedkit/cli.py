"""Command-line entry point: ``csedkit <subcommand> ...``.

Exit codes: 0 success, 1 validation error (bad input, flag or value), 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import partial
from pathlib import Path
from typing import Optional

from csedkit import FORMAT_VERSIONS, __version__
from csedkit.corruptor import RULES, ConjunctionLexicon, _check_weights, corrupt_one, write_records
from csedkit.dedup import DedupConfig, filter_leakage, write_hits_tsv
from csedkit.deptree import ConllError, parse_conllu, serialize_conllu
from csedkit.edits import M2FormatError, read_m2
from csedkit.metrics import LABELS, m2_score, per_type_recall, cls_metrics
from csedkit.sampler import DEFAULT_RELATIONS, SAMPLERS, SamplerConfig, write_examples
from csedkit.stats import format_table, labeled_stats, pair_stats

log = logging.getLogger("csedkit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    """Settings accepted from a ``key = value`` config file; flags given on the command line win."""
    input: Optional[str] = None
    output: Optional[str] = None
    gamma: Optional[str] = None
    seed: Optional[str] = None
    weights: Optional[str] = None
    rate: Optional[str] = None
    pairs_per_sentence: Optional[str] = None
    relation_set: Optional[str] = None
    beta: Optional[str] = None
    max_unchanged: Optional[str] = None
    orientation: Optional[str] = None
    lenient: Optional[str] = None
    jobs: Optional[str] = None

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        values = {}
        for n, raw in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise ValueError(f"{path}:{n}: expected 'key = value'")
            if key not in known:
                raise ValueError(f"{path}:{n}: unknown config key {key!r}")
            values[key] = value.strip()
        return cls(**values)

    def defaults(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if v is not None}
        if "lenient" in out:
            out["lenient"] = out["lenient"].lower() in ("1", "true", "yes", "on")
        return out


def _unit_interval(name):
    def conv(text):
        v = float(text)
        if not 0.0 <= v <= 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1], got {text}")
        return v
    return conv


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _weights(text):
    try:
        w = tuple(float(x) for x in text.split(","))
        _check_weights(w)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return w


def _rate(text):
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"rate must lie in (0, 1], got {text}")
    return v


def _beta(text):
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"beta must be positive, got {text}")
    return v


def build_parser() -> _Parser:
    versions = ", ".join(f"{k}={v}" for k, v in FORMAT_VERSIONS.items())
    p = _Parser(prog="csedkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"csedkit {__version__} (formats: {versions})")
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("-q", "--quiet", action="store_true", help="only report warnings and errors")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ing = sub.add_parser("ingest", help="validate CoNLL-U and write it back normalised")
    ing.add_argument("input", nargs="?")
    ing.add_argument("-o", "--output")
    ing.add_argument("--lenient", action="store_true", help="skip malformed records instead of failing")

    dd = sub.add_parser("dedup", help="remove train sentences too similar to eval sentences")
    dd.add_argument("--train", dest="input")
    dd.add_argument("--against", action="append", required=True, metavar="[NAME=]PATH",
                    help="eval split; repeatable; NAME defaults to the file stem")
    dd.add_argument("--gamma", type=_unit_interval("gamma"), default=0.70)
    dd.add_argument("--unit", choices=("char", "word"), default="char")
    dd.add_argument("-o", "--output", help="cleaned train file (default: <train>.clean.txt)")
    dd.add_argument("--report", help="TSV of removed sentences (default: <train>.hits.tsv)")
    dd.add_argument("--jobs", type=_positive_int, default=1)

    co = sub.add_parser("corrupt", help="build pseudo-error pairs from parsed correct sentences")
    co.add_argument("input", nargs="?")
    co.add_argument("-o", "--output", help="JSONL records (required)")
    co.add_argument("--tsv", help="also write corrupted<TAB>source pairs")
    co.add_argument("--weights", type=_weights, default=(1.0, 1.0, 1.0),
                    help=f"comma-separated weights for {', '.join(RULES)}")
    co.add_argument("--rate", type=_rate, default=1.0)
    co.add_argument("--seed", type=int, default=0)
    co.add_argument("--lexicon", help="conjunction list, one per line")
    co.add_argument("--lenient", action="store_true")
    co.add_argument("--jobs", type=_positive_int, default=1)

    sa = sub.add_parser("sample", help="generate dependency pair examples")
    sa.add_argument("input", nargs="?")
    sa.add_argument("--task", choices=sorted(SAMPLERS), default="dsrp")
    sa.add_argument("-o", "--output")
    sa.add_argument("--pairs-per-sentence", dest="pairs_per_sentence", type=_positive_int, default=4)
    sa.add_argument("--relation-set", dest="relation_set", help="label file, one per line")
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("--orientation", choices=("default", "flip"), default="default")
    sa.add_argument("--lenient", action="store_true")
    sa.add_argument("--jobs", type=_positive_int, default=1)

    sc = sub.add_parser("score", help="score corrections (m2) or recognition (cls)")
    scs = sc.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    m2 = scs.add_parser("m2")
    m2.add_argument("--ref", required=True, help="references in M2 format")
    m2.add_argument("--hyp", required=True, help="one tokenized hypothesis per line")
    m2.add_argument("--source", help="one tokenized source per line (default: the M2 S lines)")
    m2.add_argument("--beta", type=_beta, default=0.5)
    m2.add_argument("--max-unchanged", dest="max_unchanged", type=int, default=2)
    m2.add_argument("--per-sentence-ref", action="store_true",
                    help="pick each sentence's reference on its own F instead of the running corpus F")
    m2.add_argument("--json", help="write the full report here")
    cl = scs.add_parser("cls")
    cl.add_argument("--pred", required=True, help="TSV: id, label")
    cl.add_argument("--gold", required=True, help="TSV: id, label")
    cl.add_argument("--types", help="TSV: id, error type")
    cl.add_argument("--json")

    st = sub.add_parser("stats", help="corpus statistics")
    src = st.add_mutually_exclusive_group(required=True)
    src.add_argument("--labeled", help="TSV: sentence, label")
    src.add_argument("--pairs", help="TSV: source, target[, target...]")
    st.add_argument("--unit", choices=("token", "char"), default="token")
    st.add_argument("--detail", action="store_true", help="report token and character edit counts")
    st.add_argument("--json")
    return p


def _read(path: str) -> str:
    return Path(path).read_text("utf-8")


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, "utf-8")


def _lines(path: str) -> list[str]:
    return _read(path).splitlines()


def cmd_ingest(a) -> int:
    trees = parse_conllu(_read(a.input), lenient=a.lenient)
    _write(a.output, serialize_conllu(trees))
    log.info("ingest: %d valid sentences", len(trees))
    return 0


def cmd_dedup(a) -> int:
    evals = {}
    for spec in a.against:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = Path(spec).stem, spec
        evals[name] = _lines(path)
    train = _lines(a.input)
    kept, removed = filter_leakage(train, evals, DedupConfig(a.gamma, a.unit), jobs=a.jobs)
    base = Path(a.input)
    out = a.output or str(base.with_name(base.stem + ".clean.txt"))
    report = a.report or str(base.with_name(base.stem + ".hits.tsv"))
    _write(out, "".join(s + "\n" for s in kept))
    with open(report, "w", encoding="utf-8") as fh:
        write_hits_tsv(removed, fh)
    log.info("dedup: gamma=%.2f kept %d, removed %d of %d", a.gamma, len(kept), len(removed), len(train))
    return 0


def _map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return [fn(x) for x in items]


def _corrupt_item(item, weights, rate, seed, lex):
    tree, sid = item
    return corrupt_one(tree, sid, weights, rate, seed, lex)


def cmd_corrupt(a) -> int:
    if not a.output:
        raise ValueError("corrupt needs --output")
    trees = parse_conllu(_read(a.input), lenient=a.lenient)
    lex = ConjunctionLexicon.from_text(_read(a.lexicon)) if a.lexicon else ConjunctionLexicon.default()
    items = [(t, t.sent_id or str(n)) for n, t in enumerate(trees)]
    log.info("corrupt: seed=%d weights=%s rate=%g", a.seed, ",".join(map(str, a.weights)), a.rate)
    recs = _map(partial(_corrupt_item, weights=a.weights, rate=a.rate, seed=a.seed, lex=lex), items, a.jobs)
    recs = [r for r in recs if r is not None]
    with open(a.output, "w", encoding="utf-8") as fh:
        write_records(recs, jsonl=fh)
    if a.tsv:
        with open(a.tsv, "w", encoding="utf-8") as fh:
            write_records(recs, tsv=fh)
    log.info("corrupt: %d records from %d sentences", len(recs), len(trees))
    return 0


def _sample_item(item, task, cfg):
    tree, sid = item
    return SAMPLERS[task](tree, cfg, sid)


def cmd_sample(a) -> int:
    trees = parse_conllu(_read(a.input), lenient=a.lenient)
    relations = DEFAULT_RELATIONS
    if a.relation_set:
        relations = tuple(l.strip() for l in _lines(a.relation_set) if l.strip() and not l.startswith("#"))
    cfg = SamplerConfig(pairs_per_sentence=a.pairs_per_sentence, relation_set=relations, seed=a.seed,
                        flip=a.orientation == "flip")
    log.info("sample: task=%s seed=%d pairs_per_sentence=%d", a.task, a.seed, a.pairs_per_sentence)
    items = [(t, t.sent_id or str(n)) for n, t in enumerate(trees)]
    batches = _map(partial(_sample_item, task=a.task, cfg=cfg), items, a.jobs)
    if a.output and a.output != "-":
        with open(a.output, "w", encoding="utf-8") as fh:
            n = write_examples((e for b in batches for e in b), fh)
    else:
        n = write_examples((e for b in batches for e in b), sys.stdout)
    log.info("sample: %d examples from %d sentences", n, len(trees))
    return 0


def _tsv_map(path: str) -> dict[str, str]:
    out = {}
    for n, line in enumerate(_lines(path), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ValueError(f"{path}:{n}: expected 2 tab-separated columns")
        out[cols[0]] = cols[1].strip()
    return out


def cmd_score(a) -> int:
    if a.mode == "m2":
        refs = read_m2(_read(a.ref))
        hyps = [l.split() for l in _lines(a.hyp)]
        srcs = [l.split() for l in _lines(a.source)] if a.source else [r.source_tokens for r in refs]
        report = m2_score(srcs, hyps, refs, beta=a.beta, max_unchanged=a.max_unchanged,
                          cumulative=not a.per_sentence_ref)
    else:
        preds, golds = _tsv_map(a.pred), _tsv_map(a.gold)
        missing = [k for k in golds if k not in preds]
        if missing:
            raise ValueError(f"no prediction for id {missing[0]!r}")
        ids = list(golds)
        p = [preds[k] for k in ids]
        g = [golds[k] for k in ids]
        if a.types:
            types = _tsv_map(a.types)
            report = per_type_recall(p, g, [types.get(k) for k in ids])
        else:
            report = cls_metrics(p, g)
    print(report.summary())
    if a.json:
        _write(a.json, json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
    return 0


def cmd_stats(a) -> int:
    if a.labeled:
        rows = []
        for n, line in enumerate(_lines(a.labeled), start=1):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"{a.labeled}:{n}: expected sentence<TAB>label")
            if cols[1].strip() not in LABELS:
                raise ValueError(f"{a.labeled}:{n}: unknown label {cols[1]!r}")
            rows.append((cols[0], cols[1].strip()))
        stats = labeled_stats(rows)
    else:
        rows = []
        for n, line in enumerate(_lines(a.pairs), start=1):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise ValueError(f"{a.pairs}:{n}: expected source<TAB>target")
            rows.append((cols[0], cols[1:]))
        stats = pair_stats(rows, unit=a.unit, detail=a.detail)
    sys.stdout.write(format_table(stats))
    if a.json:
        _write(a.json, json.dumps(stats, ensure_ascii=False, indent=2) + "\n")
    return 0


COMMANDS = {"ingest": cmd_ingest, "dedup": cmd_dedup, "corrupt": cmd_corrupt, "sample": cmd_sample,
            "score": cmd_score, "stats": cmd_stats}


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    defaults = RunConfig.from_file(known.config).defaults()
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
        dests = {action.dest for action in p._actions}
        p.set_defaults(**{k: v for k, v in defaults.items() if k in dests})


def run(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"csedkit: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"csedkit: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    level = logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(level)
    try:
        if args.command in ("ingest", "dedup", "corrupt", "sample") and not args.input:
            raise ValueError("no input given")
        return COMMANDS[args.command](args)
    except (ConllError, M2FormatError, ValueError) as exc:
        print(f"csedkit {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"csedkit {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
