"""Command-line entry point.

    evalrank validate CORPUS
    evalrank classify CORPUS [--format json|dot|text]
    evalrank trace    CORPUS
    evalrank prune    CORPUS [selection options] [--explain]
    evalrank rank     CORPUS [selection options] [scoring options] [--table T]
    evalrank compare  CORPUS [selection options] [--venues V ...]
    evalrank export   CORPUS --format dot|json

Exit status: 0 on success, 1 for invalid input or options, 2 when internal
consistency checks fail.  Errors go to stderr as ``error[<Code>]: <message>``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Callable, Sequence, TextIO

from . import __version__
from .baselines import citation_ranking, venue_count_ranking
from .corpus import Corpus, TimeInterval, ingest_corpus
from .errors import CoherenceError, ConfigError, EvalRankError, UsageError
from .evolution import build_evolution_trace
from .pruning import PruneConfig, select_top_n
from .ranking import TABLES, RankParams, rank_report
from .relations import RelationKind, classify_relationships, graph_to_dot

DEFAULT_TIMEFRAME = "1940s:2023"

_FORMATS = {
    "validate": ("text", "json"),
    "classify": ("json", "dot", "text"),
    "trace": ("json",),
    "prune": ("json", "text"),
    "rank": ("csv", "json", "text"),
    "compare": ("csv", "json"),
    "export": ("dot", "json"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2; usage problems are exit 1 here
        raise UsageError(f"{message}\n{self.format_usage().rstrip()}")


def _selection_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("selection")
    g.add_argument("--n", type=int, default=100, help="size of the selection (default 100)")
    g.add_argument("--pioneering-fraction", type=float, default=0.4)
    g.add_argument("--progressive-fraction", type=float, default=0.6)
    g.add_argument("--timeframe", default=DEFAULT_TIMEFRAME,
                   help=f"BEGIN:END with YYYY, YYYY-MM-DD or YYYYs tokens (default {DEFAULT_TIMEFRAME})")
    g.add_argument("--field", default=None, help="EC node to scope to (default: taxonomy root)")
    g.add_argument("--explain", action="store_true", help="per-round selection report on stderr")


def _scoring_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scoring")
    g.add_argument("--pioneering-weight", type=float, default=0.2)
    g.add_argument("--first-author-ratio", type=float, default=0.3)
    g.add_argument("--corresponding-author-ratio", type=float, default=0.3)
    g.add_argument("--no-compound", dest="compound", action="store_false",
                   help="pioneer bonus counts descendants instead of summing their scores")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evalrank", description="Rank achievements, contributors and institutions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("corpus", help="corpus JSON file, or - for stdin")
    common.add_argument("--format", dest="fmt", default=None)
    common.add_argument("--lenient", action="store_true", help="ignore unknown keys in the corpus")
    common.add_argument("--seedless-determinism-check", action="store_true",
                        help="compute the output twice and fail if the bytes differ")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="check a corpus document")
    sub.add_parser("classify", parents=[common], help="relation graph of the whole corpus")
    sub.add_parser("trace", parents=[common], help="single-addition evolution trace as JSON lines")
    p = sub.add_parser("prune", parents=[common], help="top-N selection with its round log")
    _selection_options(p)
    p = sub.add_parser("rank", parents=[common], help="score tables for the selection")
    _selection_options(p)
    _scoring_options(p)
    p.add_argument("--table", choices=TABLES, default="achievements", help="table for csv output")
    p = sub.add_parser("compare", parents=[common], help="evaluatology ranks next to bibliometric ones")
    _selection_options(p)
    _scoring_options(p)
    p.add_argument("--table", choices=("achievements", "contributors"), default="achievements")
    p.add_argument("--venues", nargs="*", default=[], metavar="VENUE")
    p = sub.add_parser("export", parents=[common], help="relation graph of the selection")
    _selection_options(p)
    return parser


# --------------------------------------------------------------------------
# helpers


def _load(path: str, lenient: bool) -> Corpus:
    if path == "-":
        return ingest_corpus(sys.stdin.buffer.read(), lenient=lenient)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return ingest_corpus(data, lenient=lenient)


def _prune_config(args: argparse.Namespace) -> PruneConfig:
    return PruneConfig(
        n=args.n,
        pioneering_fraction=args.pioneering_fraction,
        progressive_fraction=args.progressive_fraction,
        timeframe=TimeInterval.parse_range(args.timeframe),
        field=args.field,
    )


def _rank_params(args: argparse.Namespace) -> RankParams:
    return RankParams(
        pioneering_weight=args.pioneering_weight,
        first_author_ratio=args.first_author_ratio,
        corresponding_author_ratio=args.corresponding_author_ratio,
        compound=args.compound,
    )


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _competition_ranks(ordered: Sequence[tuple[str, object]]) -> dict[str, int]:
    """1-based ranks for an already sorted list; equal keys share a rank."""
    ranks: dict[str, int] = {}
    prev = object()
    rank = 0
    for pos, (item, key) in enumerate(ordered, start=1):
        if key != prev:
            rank, prev = pos, key
        ranks[item] = rank
    return ranks


# --------------------------------------------------------------------------
# commands; each returns the text for stdout


def _validate(corpus: Corpus, args, err: TextIO) -> str:
    summary = {
        "achievements": len(corpus),
        "ec_nodes": len(corpus.taxonomy),
        "institutions": len(corpus.institutions),
        "root": corpus.taxonomy.root,
        "digest": corpus.digest,
    }
    if args.fmt == "json":
        return _dumps(summary)
    return (f"ok: {summary['achievements']} achievements, {summary['ec_nodes']} EC nodes, "
            f"{summary['institutions']} institutions, digest {summary['digest'][:16]}\n")


def _classify(corpus: Corpus, args, err: TextIO) -> str:
    graph = classify_relationships(corpus)
    if args.fmt == "dot":
        return graph_to_dot(graph, corpus)
    if args.fmt == "text":
        lines = [f"pioneer {aid}" for aid in sorted(graph.pioneers)]
        arrow = {RelationKind.Progressive: "->", RelationKind.Parallel: "--",
                 RelationKind.RelatedNotConnected: "..>"}
        lines += [f"{e.kind.value} {e.source} {arrow[e.kind]} {e.target}" for e in graph.edges]
        return "\n".join(lines) + "\n"
    return graph.to_json()


def _trace(corpus: Corpus, args, err: TextIO) -> str:
    return build_evolution_trace(corpus, classify_relationships(corpus)).to_jsonl()


def _select(corpus: Corpus, args, err: TextIO):
    scoped, graph, pem = select_top_n(corpus, _prune_config(args))
    if args.explain:
        err.write(pem.explain())
    return scoped, graph, pem


def _prune(corpus: Corpus, args, err: TextIO) -> str:
    _, _, pem = _select(corpus, args, err)
    if args.fmt == "text":
        return "\n".join(pem.selected) + "\n"
    return _dumps({"selected": list(pem.selected), "rounds": [r.to_dict() for r in pem.round_log]})


def _rank(corpus: Corpus, args, err: TextIO) -> str:
    scoped, graph, pem = _select(corpus, args, err)
    report = rank_report(scoped, pem, graph, _rank_params(args))
    if args.fmt == "json":
        return report.to_json()
    if args.fmt == "text":
        return report.to_text()
    return report.to_csv(args.table)


def _compare(corpus: Corpus, args, err: TextIO) -> str:
    scoped, graph, pem = _select(corpus, args, err)
    report = rank_report(scoped, pem, graph, _rank_params(args))
    if args.table == "achievements":
        by_cites = citation_ranking(scoped)
        has_pub = {a.id: a.publication is not None for a in scoped}
        cite_rank = _competition_ranks([(aid, (not has_pub[aid], -n)) for aid, n in by_cites])
        eval_rank = {r.id: r.rank for r in report.achievements}
        header = ["id", "name", "evaluatology_rank", "citation_rank", "citation_count"]
        rows = [[aid, scoped.get(aid).title, eval_rank.get(aid, ""), cite_rank[aid], n]
                for aid, n in by_cites]
    else:
        by_venue = venue_count_ranking(scoped, args.venues)
        venue_rank = _competition_ranks([(p, -n) for p, n in by_venue])
        cites: dict[str, int] = {p: 0 for p, _ in by_venue}
        names: dict[str, str] = {}
        for a in scoped:
            for c in a.contributors:
                names.setdefault(c.person, c.name)
                cites[c.person] += a.publication.citation_count if a.publication else 0
        by_cites = sorted(cites.items(), key=lambda kv: (-kv[1], kv[0]))
        cite_rank = _competition_ranks([(p, -n) for p, n in by_cites])
        eval_rank = {r.id: r.rank for r in report.contributors}
        header = ["id", "name", "evaluatology_rank", "citation_rank", "citations",
                  "venue_count_rank", "venue_count"]
        order = sorted(names, key=lambda p: (eval_rank.get(p, len(names) + 1), cite_rank[p], p))
        rows = [[p, names[p], eval_rank.get(p, ""), cite_rank[p], cites[p], venue_rank[p],
                 dict(by_venue)[p]] for p in order]
    if args.fmt == "json":
        return _dumps([dict(zip(header, row)) for row in rows])
    return _csv(header, rows)


def _export(corpus: Corpus, args, err: TextIO) -> str:
    scoped, graph, pem = _select(corpus, args, err)
    sub = graph.restrict(pem.selected)
    if args.fmt == "json":
        return sub.to_json()
    labels = Corpus(scoped.taxonomy, {aid: scoped.get(aid) for aid in pem.selected}, scoped.institutions)
    return graph_to_dot(sub, labels)


_COMMANDS: dict[str, Callable[[Corpus, argparse.Namespace, TextIO], str]] = {
    "validate": _validate,
    "classify": _classify,
    "trace": _trace,
    "prune": _prune,
    "rank": _rank,
    "compare": _compare,
    "export": _export,
}


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        allowed = _FORMATS[args.command]
        if args.fmt is None:
            args.fmt = allowed[0]
        elif args.fmt not in allowed:
            raise ConfigError(f"{args.command} supports --format {', '.join(allowed)}; got {args.fmt!r}")
        corpus = _load(args.corpus, args.lenient)
        command = _COMMANDS[args.command]
        text = command(corpus, args, err)
        if args.seedless_determinism_check:
            again = command(_load(args.corpus, args.lenient), args, io.StringIO())
            if again != text:
                raise CoherenceError("two runs on the same input produced different output")
    except EvalRankError as exc:
        err.write(f"error[{exc.code}]: {exc}\n")
        return exc.exit_code
    out.write(text)
    return 0


def main() -> None:
    sys.exit(run())
