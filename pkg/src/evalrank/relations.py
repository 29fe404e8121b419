"""Relationship classification between achievements.

Pioneering is a unary flag.  The three pairwise kinds all require the same
key problem and a shared EC node (exact id match, no ancestor expansion);
they then differ only in timing and citation:

* Progressive: strictly disjoint intervals and a citation in either direction.
* Parallel: closed intervals overlap.
* RelatedNotConnected: disjoint intervals and the later work does not cite
  the earlier one.  Classification only tests neighbours in completion
  order within a key-problem class.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable

from .corpus import Achievement, Corpus, chrono_key
from .errors import NotOriented
from .taxonomy import subtree_ids


class RelationKind(str, Enum):
    Progressive = "Progressive"
    Parallel = "Parallel"
    RelatedNotConnected = "RelatedNotConnected"


_KIND_ORDER = {k: i for i, k in enumerate(RelationKind)}


@dataclass(frozen=True)
class RelationEdge:
    source: str
    target: str
    kind: RelationKind

    def sort_key(self) -> tuple[str, str, int]:
        return (self.source, self.target, _KIND_ORDER[self.kind])

    def to_dict(self) -> dict[str, str]:
        return {"from": self.source, "to": self.target, "kind": self.kind.value}


@dataclass(frozen=True)
class RelationGraph:
    pioneers: frozenset[str]
    edges: tuple[RelationEdge, ...]
    corpus_digest: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "pioneers", frozenset(self.pioneers))
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges), key=RelationEdge.sort_key)))

    def of_kind(self, kind: RelationKind) -> list[RelationEdge]:
        return [e for e in self.edges if e.kind == kind]

    def to_dict(self) -> dict:
        return {"pioneers": sorted(self.pioneers), "edges": [e.to_dict() for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def restrict(self, ids: Iterable[str], corpus_digest: str | None = None) -> "RelationGraph":
        keep = set(ids)
        return RelationGraph(
            self.pioneers & keep,
            tuple(e for e in self.edges if e.source in keep and e.target in keep),
            self.corpus_digest if corpus_digest is None else corpus_digest,
        )


# --------------------------------------------------------------------------
# predicates


def _comparable(a: Achievement, b: Achievement) -> bool:
    return a.key_problem == b.key_problem and not a.ec_mapping.isdisjoint(b.ec_mapping)


def _pair(corpus: Corpus, a: str, b: str) -> tuple[Achievement, Achievement]:
    x, y = corpus.get(a), corpus.get(b)
    if a == b:
        raise ValueError(f"relationship needs two distinct achievements, got {a!r} twice")
    return x, y


def is_pioneering(corpus: Corpus, a: str) -> bool:
    """Introduces at least one EC node and nothing under those nodes finished earlier."""
    x = corpus.get(a)
    if not x.introduces_ec_nodes:
        return False
    tax = corpus.taxonomy
    for node in x.introduces_ec_nodes:
        scope = subtree_ids(tax, node)
        for other in corpus:
            if other.id != x.id and other.ec_mapping & scope and other.end < x.begin:
                return False
    return True


def is_progressive(corpus: Corpus, a: str, b: str) -> bool:
    x, y = _pair(corpus, a, b)
    disjoint = x.interval.precedes(y.interval) or y.interval.precedes(x.interval)
    cited = x.id in y.references or y.id in x.references
    return _comparable(x, y) and disjoint and cited


def is_parallel(corpus: Corpus, a: str, b: str) -> bool:
    x, y = _pair(corpus, a, b)
    return _comparable(x, y) and x.interval.overlaps(y.interval)


def is_related_not_connected(corpus: Corpus, a: str, b: str) -> bool:
    """``a`` must be the earlier achievement (it ends before ``b`` begins)."""
    x, y = _pair(corpus, a, b)
    if not x.interval.precedes(y.interval):
        raise NotOriented(f"{a!r} does not strictly precede {b!r}")
    return _comparable(x, y) and x.id not in y.references


def _oriented(x: Achievement, y: Achievement) -> tuple[str, str]:
    return (x.id, y.id) if chrono_key(x) <= chrono_key(y) else (y.id, x.id)


# --------------------------------------------------------------------------
# classification


def classify_relationships(corpus: Corpus) -> RelationGraph:
    pioneers = frozenset(a.id for a in corpus if is_pioneering(corpus, a.id))

    classes: dict[str, list[Achievement]] = defaultdict(list)
    for a in corpus:
        classes[a.key_problem].append(a)

    edges: list[RelationEdge] = []
    for q in sorted(classes):
        members = sorted(classes[q], key=chrono_key)
        # only same-Q pairs can relate, so pairs are enumerated per class
        for x, y in combinations(members, 2):
            if x.ec_mapping.isdisjoint(y.ec_mapping):
                continue
            if x.interval.overlaps(y.interval):
                lo, hi = sorted((x.id, y.id))
                edges.append(RelationEdge(lo, hi, RelationKind.Parallel))
            elif x.id in y.references or y.id in x.references:
                edges.append(RelationEdge(*_oriented(x, y), RelationKind.Progressive))
        for x, y in zip(members, members[1:]):
            if (
                not x.ec_mapping.isdisjoint(y.ec_mapping)
                and x.interval.precedes(y.interval)
                and x.id not in y.references
            ):
                edges.append(RelationEdge(x.id, y.id, RelationKind.RelatedNotConnected))

    return RelationGraph(pioneers, tuple(edges), corpus.digest)


def many_to_one_groups(graph: RelationGraph) -> list[tuple[frozenset[str], str]]:
    """Achievements with two or more Progressive predecessors."""
    preds: dict[str, set[str]] = defaultdict(set)
    for e in graph.of_kind(RelationKind.Progressive):
        preds[e.target].add(e.source)
    return [(frozenset(p), t) for t, p in sorted(preds.items()) if len(p) >= 2]


def one_to_many_groups(graph: RelationGraph) -> list[tuple[str, frozenset[str]]]:
    succs: dict[str, set[str]] = defaultdict(set)
    for e in graph.of_kind(RelationKind.Progressive):
        succs[e.source].add(e.target)
    return [(s, frozenset(t)) for s, t in sorted(succs.items()) if len(t) >= 2]


# --------------------------------------------------------------------------
# DOT


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


_DOT_STYLE = {
    RelationKind.Progressive: 'color="black"',
    RelationKind.Parallel: 'dir=none, style=dashed, color="blue"',
    RelationKind.RelatedNotConnected: 'style=dotted, color="gray40"',
}


def graph_to_dot(graph: RelationGraph, corpus: Corpus | None = None) -> str:
    """Graphviz digraph with one subgraph per relation kind."""
    ids = set(graph.pioneers)
    for e in graph.edges:
        ids.update((e.source, e.target))
    if corpus is not None:
        ids.update(corpus.achievements)

    lines = ["digraph relations {", "  rankdir=LR;", "  node [shape=box];"]
    for aid in sorted(ids):
        attrs = []
        if corpus is not None and aid in corpus.achievements:
            a = corpus.achievements[aid]
            label = f"{a.title}\n{a.begin.year}"
            attrs.append(f"label={_dot_quote(label)}")
        if aid in graph.pioneers:
            attrs.append("peripheries=2")
            attrs.append("style=bold")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_dot_quote(aid)}{suffix};")
    for kind in RelationKind:
        lines.append(f"  subgraph {kind.value.lower()} {{")
        lines.append(f"    edge [{_DOT_STYLE[kind]}];")
        for e in graph.of_kind(kind):
            lines.append(f"    {_dot_quote(e.source)} -> {_dot_quote(e.target)};")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
