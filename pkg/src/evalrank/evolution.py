"""Single-addition evolution trace of a corpus.

Achievements are replayed in completion order (end, begin, id).  Each event
records the edges linking the newcomer to what was already present, so the
concatenation of all events is the full relation graph.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import Corpus, chrono_key
from .errors import GraphCorpusMismatch, StepOutOfRange
from .relations import RelationEdge, RelationGraph


@dataclass(frozen=True)
class EvolutionEvent:
    step: int
    added: str
    new_pioneer: bool
    edges_added: tuple[RelationEdge, ...]

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "added": self.added,
            "new_pioneer": self.new_pioneer,
            "edges_added": [e.to_dict() for e in self.edges_added],
        }


@dataclass(frozen=True)
class EvolutionTrace:
    events: tuple[EvolutionEvent, ...]
    corpus_digest: str

    def __len__(self) -> int:
        return len(self.events)

    def order(self) -> list[str]:
        return [e.added for e in self.events]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), separators=(",", ":")) + "\n" for e in self.events)


@dataclass(frozen=True)
class Snapshot:
    step: int
    achievements: frozenset[str]
    graph: RelationGraph


def check_coherent(corpus: Corpus, graph: RelationGraph) -> None:
    if graph.corpus_digest != corpus.digest:
        raise GraphCorpusMismatch(
            f"relation graph was built from corpus {graph.corpus_digest[:12] or '<unknown>'}, "
            f"not {corpus.digest[:12]}"
        )


def build_evolution_trace(corpus: Corpus, graph: RelationGraph) -> EvolutionTrace:
    check_coherent(corpus, graph)
    order = [a.id for a in sorted(corpus, key=chrono_key)]
    position = {aid: i for i, aid in enumerate(order)}

    per_step: dict[str, list[RelationEdge]] = {aid: [] for aid in order}
    for e in graph.edges:
        if e.source not in position or e.target not in position:
            raise GraphCorpusMismatch(f"edge {e.source!r} -> {e.target!r} leaves the corpus")
        later = e.source if position[e.source] > position[e.target] else e.target
        per_step[later].append(e)

    events = tuple(
        EvolutionEvent(
            step=i + 1,
            added=aid,
            new_pioneer=aid in graph.pioneers,
            edges_added=tuple(per_step[aid]),
        )
        for i, aid in enumerate(order)
    )
    return EvolutionTrace(events, corpus.digest)


def replay(trace: EvolutionTrace, k: int) -> Snapshot:
    """State after the first ``k`` additions (``k = 0`` is the empty set)."""
    if not 0 <= k <= len(trace.events):
        raise StepOutOfRange(f"step {k} outside 0..{len(trace.events)}")
    done = trace.events[:k]
    graph = RelationGraph(
        frozenset(e.added for e in done if e.new_pioneer),
        tuple(edge for e in done for edge in e.edges_added),
        trace.corpus_digest,
    )
    return Snapshot(k, frozenset(e.added for e in done), graph)
