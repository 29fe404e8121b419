"""Significance values and four-round filtering down to the top N.

Each achievement belongs to exactly one relationship class, decided from the
relation graph in this order: pioneer, progressive (touches a Progressive
edge), auxiliary (touches a Parallel or RelatedNotConnected edge), isolated.
Candidates are grouped by key problem and ranked inside a group by
significance V (ties: earlier end, then id).  V is never compared across
groups; a budget is split across groups by largest-remainder quotas
proportional to the number of candidates in each group.

Every admission step takes a top-V prefix of what remains of a
(group, class) list, so a selected achievement is never outranked by an
unselected one of the same group and class.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .corpus import Achievement, Corpus, Orientation, TimeInterval, chrono_key, filter_corpus
from .errors import CoherenceError, ConfigError, NonPositiveDim
from .evolution import EvolutionTrace, build_evolution_trace, check_coherent
from .relations import RelationGraph, RelationKind, classify_relationships


def significance_value(a: Achievement) -> float:
    """Sum of log10 over positive dimensions minus log10 over negative ones."""
    v = 0.0
    for d in a.dims:
        if not d.value > 0:
            raise NonPositiveDim(f"dimension {d.name!r} of {a.id!r} must be > 0", f"achievement {a.id!r}")
        lg = math.log10(d.value)
        v += lg if d.orientation is Orientation.Positive else -lg
    return v


def round_half_up(x: Decimal) -> int:
    return int(x.quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class PruneConfig:
    n: int = 100
    pioneering_fraction: float = 0.4
    progressive_fraction: float = 0.6
    timeframe: TimeInterval | None = None
    field: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        for name in ("pioneering_fraction", "progressive_fraction"):
            frac = getattr(self, name)
            if not 0.0 <= frac <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {frac}")
        if abs(self.pioneering_fraction + self.progressive_fraction - 1.0) > 1e-9:
            raise ConfigError(
                f"fractions must add up to 1, got {self.pioneering_fraction} + {self.progressive_fraction}"
            )

    def budgets(self) -> tuple[int, int]:
        """(pioneering, progressive) slot counts; they always add up to n."""
        pioneering = round_half_up(Decimal(repr(self.pioneering_fraction)) * self.n)
        return pioneering, self.n - pioneering


class RelationClass(str, Enum):
    Pioneer = "pioneer"
    Progressive = "progressive"
    Auxiliary = "auxiliary"
    Isolated = "isolated"


def relation_classes(corpus: Corpus, graph: RelationGraph) -> dict[str, RelationClass]:
    progressive: set[str] = set()
    auxiliary: set[str] = set()
    for e in graph.edges:
        bucket = progressive if e.kind is RelationKind.Progressive else auxiliary
        bucket.update((e.source, e.target))
    out = {}
    for aid in corpus.achievements:
        if aid in graph.pioneers:
            out[aid] = RelationClass.Pioneer
        elif aid in progressive:
            out[aid] = RelationClass.Progressive
        elif aid in auxiliary:
            out[aid] = RelationClass.Auxiliary
        else:
            out[aid] = RelationClass.Isolated
    return out


def allocate(budget: int, sizes: Mapping[str, int]) -> dict[str, int]:
    """Largest-remainder split of ``budget`` proportional to ``sizes``.

    Never exceeds a group's size; hands out ``min(budget, sum(sizes))`` slots.
    Remainder ties go to the larger group, then the smaller key.
    """
    total = sum(sizes.values())
    budget = min(budget, total)
    if budget <= 0:
        return {g: 0 for g in sizes}
    exact = {g: Fraction(budget * s, total) for g, s in sizes.items()}
    quota = {g: math.floor(x) for g, x in exact.items()}
    left = budget - sum(quota.values())
    order = sorted(sizes, key=lambda g: (-(exact[g] - quota[g]), -sizes[g], g))
    for g in order[:left]:
        quota[g] += 1
    return quota


@dataclass(frozen=True)
class RoundRecord:
    round: int
    label: str
    budget: int
    kept: tuple[str, ...]
    removed: tuple[str, ...]
    comparisons: tuple[dict, ...] = ()
    iteration: int = 0

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "iteration": self.iteration,
            "label": self.label,
            "budget": self.budget,
            "kept": list(self.kept),
            "removed": list(self.removed),
            "comparisons": list(self.comparisons),
        }


@dataclass(frozen=True)
class PragmaticEM:
    selected: tuple[str, ...]
    round_log: tuple[RoundRecord, ...]
    config: PruneConfig
    corpus_digest: str
    classes: Mapping[str, RelationClass] = field(default_factory=dict)
    values: Mapping[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.selected)

    def __contains__(self, aid: object) -> bool:
        return aid in self.selected

    def log_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.round_log], indent=2) + "\n"

    def explain(self) -> str:
        lines = []
        for r in self.round_log:
            head = f"round {r.round}" if not r.iteration else f"iteration {r.iteration} (round {r.round} rerun)"
            if r.round == 5:
                head = f"iteration {r.iteration} (relaxed)"
            lines.append(f"{head}: {r.label}, budget {r.budget}, kept {len(r.kept)}, removed {len(r.removed)}")
            for c in r.comparisons:
                thr = "" if c.get("threshold") is None else f" (threshold V >= {c['threshold']:.4f})"
                lines.append(f"  group {c['group']}{thr}")
                for aid, v, kept in c["ranked"]:
                    lines.append(f"    {'+' if kept else '-'} {aid:<28} V={v:.4f}")
        lines.append("selected: " + ", ".join(self.selected))
        return "\n".join(lines) + "\n"


class _Selector:
    """Mutable state for one pruning run."""

    def __init__(self, corpus: Corpus, graph: RelationGraph, unbounded: bool):
        self.corpus = corpus
        self.unbounded = unbounded
        self.values = {a.id: significance_value(a) for a in corpus}
        self.classes = relation_classes(corpus, graph)
        self.neighbours: dict[str, set[str]] = defaultdict(set)
        for e in graph.edges:
            if e.kind is not RelationKind.Progressive:
                self.neighbours[e.source].add(e.target)
                self.neighbours[e.target].add(e.source)
        self.selected: list[str] = []
        self.chosen: set[str] = set()
        self.log: list[RoundRecord] = []
        self.iteration = 0

    def rank_key(self, aid: str):
        a = self.corpus.achievements[aid]
        return (-self.values[aid], a.end, aid)

    def remaining(self, cls: RelationClass) -> dict[str, list[str]]:
        groups: dict[str, list[str]] = defaultdict(list)
        for aid, c in self.classes.items():
            if c is cls and aid not in self.chosen:
                groups[self.corpus.achievements[aid].key_problem].append(aid)
        return {g: sorted(ids, key=self.rank_key) for g, ids in sorted(groups.items())}

    def _take(self, rnd: int, label: str, budget: int, pools: dict[str, list[str]],
              thresholds: Mapping[str, float] | None = None,
              considered: Mapping[str, list[str]] | None = None) -> list[str]:
        """Allocate ``budget`` over per-group ranked pools, keep the prefixes, log."""
        quota = allocate(budget, {g: len(p) for g, p in pools.items() if p})
        kept: list[str] = []
        comparisons = []
        considered = considered if considered is not None else pools
        for g in sorted(considered):
            take = set(pools.get(g, [])[: quota.get(g, 0)])
            kept.extend(pools.get(g, [])[: quota.get(g, 0)])
            comparisons.append({
                "group": g,
                "threshold": None if thresholds is None else thresholds.get(g),
                "ranked": [[aid, round(self.values[aid], 12), aid in take] for aid in considered[g]],
            })
        removed = sorted(aid for ids in considered.values() for aid in ids if aid not in set(kept))
        for aid in kept:
            self.chosen.add(aid)
            self.selected.append(aid)
        self.log.append(RoundRecord(rnd, label, max(budget, 0), tuple(kept), tuple(removed),
                                    tuple(comparisons), self.iteration))
        return kept

    def quota_round(self, rnd: int, label: str, cls: RelationClass, budget: int) -> list[str]:
        return self._take(rnd, label, budget, self.remaining(cls))

    def auxiliary_round(self, rnd: int, label: str, anchors: Iterable[str], budget: int,
                        use_threshold: bool = True) -> list[str]:
        """Admit auxiliary achievements tied to ``anchors`` in the same group.

        A group's admissible set is closed upward in V: anything at least as
        significant as an admissible linked achievement is admissible too.
        """
        anchors_by_group: dict[str, list[str]] = defaultdict(list)
        for aid in anchors:
            anchors_by_group[self.corpus.achievements[aid].key_problem].append(aid)
        pools: dict[str, list[str]] = {}
        considered: dict[str, list[str]] = {}
        thresholds: dict[str, float] = {}
        for g, ranked in self.remaining(RelationClass.Auxiliary).items():
            group_anchors = set(anchors_by_group.get(g, ()))
            if not group_anchors:
                continue
            linked = [aid for aid in ranked if self.neighbours[aid] & group_anchors]
            if not linked:
                continue
            considered[g] = linked
            threshold = min(self.values[a] for a in group_anchors) if use_threshold and not self.unbounded else -math.inf
            if use_threshold and not self.unbounded:
                thresholds[g] = round(threshold, 12)
            eligible = [aid for aid in linked if self.values[aid] >= threshold]
            if eligible:
                cutoff = self.rank_key(eligible[-1])
                pools[g] = [aid for aid in ranked if self.rank_key(aid) <= cutoff]
                considered[g] = sorted(set(linked) | set(pools[g]), key=self.rank_key)
        return self._take(rnd, label, budget, pools, thresholds if thresholds else None, considered)

    def selected_of(self, cls: RelationClass) -> list[str]:
        return [aid for aid in self.selected if self.classes[aid] is cls]


def _validate_inputs(corpus: Corpus, graph: RelationGraph, trace: EvolutionTrace | None) -> None:
    check_coherent(corpus, graph)
    if trace is not None and trace.corpus_digest != corpus.digest:
        raise CoherenceError("evolution trace was built from a different corpus")


def scope_corpus(corpus: Corpus, config: PruneConfig) -> Corpus:
    """Apply the (X, Y) filter of ``config``; returns ``corpus`` itself when nothing changes."""
    if config.timeframe is None and config.field in (None, corpus.taxonomy.root):
        return corpus
    timeframe = config.timeframe
    if timeframe is None:
        dates = [a.begin for a in corpus] + [a.end for a in corpus]
        if not dates:
            return corpus
        timeframe = TimeInterval(min(dates), max(dates))
    scoped = filter_corpus(corpus, timeframe, config.field or corpus.taxonomy.root)
    return corpus if scoped.digest == corpus.digest else scoped


def prune(corpus: Corpus, graph: RelationGraph, trace: EvolutionTrace | None,
          config: PruneConfig) -> PragmaticEM:
    """Reduce the corpus to ``min(n, available)`` achievements in four rounds.

    If ``config`` narrows the corpus, relations and trace are rebuilt on the
    narrowed corpus first.
    """
    _validate_inputs(corpus, graph, trace)
    scoped = scope_corpus(corpus, config)
    if scoped is not corpus:
        graph = classify_relationships(scoped)
        trace = build_evolution_trace(scoped, graph)
        corpus = scoped

    target = min(config.n, len(corpus))
    unbounded = config.n >= len(corpus)
    # everything fits: no round needs to drop anything
    pioneer_budget, progressive_budget = (target, target) if unbounded else config.budgets()
    sel = _Selector(corpus, graph, unbounded)
    P, G = RelationClass.Pioneer, RelationClass.Progressive

    s1 = sel.quota_round(1, "progressive achievements by shared key problem", G, progressive_budget)
    sel.auxiliary_round(2, "parallel / related-but-not-connected to round-1 survivors", s1,
                        progressive_budget - len(s1))
    used_progressive = len(sel.selected)
    s3 = sel.quota_round(3, "pioneering achievements by shared key problem", P, pioneer_budget)
    sel.auxiliary_round(4, "parallel / related-but-not-connected to round-3 survivors", s3,
                        pioneer_budget - len(s3))

    progressive_short = used_progressive < progressive_budget

    def rerun_progressive(free: int) -> int:
        got = len(sel.quota_round(1, "progressive (surplus transfer)", G, free))
        return got + len(sel.auxiliary_round(2, "auxiliary to progressive (surplus transfer)",
                                             sel.selected_of(G), free - got))

    def rerun_pioneering(free: int) -> int:
        got = len(sel.quota_round(3, "pioneering (surplus transfer)", P, free))
        return got + len(sel.auxiliary_round(4, "auxiliary to pioneering (surplus transfer)",
                                             sel.selected_of(P), free - got))

    def relax_linked(free: int) -> int:
        return len(sel.auxiliary_round(5, "auxiliary linked to any selected achievement",
                                       sel.selected, free, use_threshold=False))

    def relax_rest(free: int) -> int:
        got = len(sel.quota_round(5, "remaining auxiliary achievements", RelationClass.Auxiliary, free))
        if got:
            return got
        return len(sel.quota_round(5, "isolated achievements", RelationClass.Isolated, free))

    steps: list[Callable[[int], int]] = (
        [rerun_pioneering, rerun_progressive] if progressive_short else [rerun_progressive, rerun_pioneering]
    ) + [relax_linked, relax_rest]

    while len(sel.selected) < target:
        sel.iteration += 1
        for step in steps:
            before = len(sel.log)
            if step(target - len(sel.selected)):
                break
            del sel.log[before:]  # drop no-op records
        else:  # pragma: no cover - relax_rest always finds something below target
            raise CoherenceError("pruning could not reach its target size")

    order = sorted(sel.selected, key=lambda aid: chrono_key(corpus.achievements[aid]))
    return PragmaticEM(
        selected=tuple(order),
        round_log=tuple(sel.log),
        config=config,
        corpus_digest=corpus.digest,
        classes=dict(sel.classes),
        values=dict(sel.values),
    )


def select_top_n(corpus: Corpus, config: PruneConfig) -> tuple[Corpus, RelationGraph, PragmaticEM]:
    """Filter, classify, trace and prune in one call."""
    scoped = scope_corpus(corpus, config)
    graph = classify_relationships(scoped)
    trace = build_evolution_trace(scoped, graph)
    return scoped, graph, prune(scoped, graph, trace, config)
