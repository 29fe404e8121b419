"""Scores for selected achievements, their contributors and institutions.

Every selected achievement starts at 1.0.  A selected pioneer additionally
earns ``pioneering_weight`` times the summed scores of the selected
achievements it reaches through Progressive edges without leaving the
selection.  Scores are computed in reverse topological order, so a nested
pioneer's bonus flows up to the pioneer above it (``compound=False`` sums
base scores only).
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Mapping

from .corpus import Achievement, Corpus, Role
from .errors import ConfigError, CycleDetected, NoContributors, UnknownInstitution
from .pruning import PragmaticEM
from .relations import RelationGraph, RelationKind

TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RankParams:
    pioneering_weight: float = 0.2
    first_author_ratio: float = 0.3
    corresponding_author_ratio: float = 0.3
    compound: bool = True

    def __post_init__(self) -> None:
        if self.pioneering_weight < 0:
            raise ConfigError(f"pioneering_weight must be >= 0, got {self.pioneering_weight}")
        for name in ("first_author_ratio", "corresponding_author_ratio"):
            r = getattr(self, name)
            if not 0.0 <= r <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {r}")
        if self.first_author_ratio + self.corresponding_author_ratio > 1.0 + 1e-12:
            raise ConfigError("first_author_ratio + corresponding_author_ratio must not exceed 1")


def score_achievements(selected: PragmaticEM | Iterable[str], graph: RelationGraph,
                       params: RankParams) -> dict[str, float]:
    ids = list(selected.selected if isinstance(selected, PragmaticEM) else selected)
    keep = set(ids)
    succ: dict[str, set[str]] = {aid: set() for aid in ids}
    for e in graph.of_kind(RelationKind.Progressive):
        if e.source in keep and e.target in keep:
            succ[e.source].add(e.target)

    # TopologicalSorter wants predecessors; feeding successors yields sinks first.
    try:
        order = list(TopologicalSorter({aid: sorted(succ[aid]) for aid in sorted(ids)}).static_order())
    except CycleError as exc:
        raise CycleDetected(f"Progressive edges form a cycle: {exc.args[1]}") from None

    descendants: dict[str, set[str]] = {}
    score: dict[str, float] = {}
    for aid in order:
        below: set[str] = set()
        for child in succ[aid]:
            below.add(child)
            below |= descendants[child]
        descendants[aid] = below
        s = 1.0
        if aid in graph.pioneers and below:
            total = math.fsum(score[d] for d in sorted(below)) if params.compound else float(len(below))
            s += params.pioneering_weight * total
        score[aid] = s
    return {aid: score[aid] for aid in sorted(ids)}


def contributor_shares(a: Achievement, score: float, params: RankParams) -> dict[str, float]:
    """Split ``score`` over the authors of ``a``.

    Three or fewer authors, or all flagged equal: even split.  Otherwise the
    first-author and corresponding-author ratios go to the flagged holders
    (position 1 and the last position when nobody is flagged) and the rest is
    split evenly over everybody else.  Someone holding both roles gets both.
    """
    authors = sorted(a.contributors, key=lambda c: c.position)
    if not authors:
        raise NoContributors(f"achievement {a.id!r} has no contributors")
    k = len(authors)
    if k <= 3 or all(Role.EqualContribution in c.roles for c in authors):
        return {c.person: score / k for c in authors}

    first = [c.person for c in authors if Role.FirstAuthor in c.roles] or [authors[0].person]
    corresponding = [c.person for c in authors if Role.CorrespondingAuthor in c.roles] or [authors[-1].person]
    others = [c.person for c in authors if c.person not in first and c.person not in corresponding]
    rest = 1.0 - params.first_author_ratio - params.corresponding_author_ratio
    # nobody left for the remainder: spread it over everyone to conserve the score
    rest_to = others or [c.person for c in authors]

    shares = {c.person: 0.0 for c in authors}
    for p in first:
        shares[p] += score * params.first_author_ratio / len(first)
    for p in corresponding:
        shares[p] += score * params.corresponding_author_ratio / len(corresponding)
    for p in rest_to:
        shares[p] += score * rest / len(rest_to)
    return shares


def institution_rollup(corpus: Corpus, shares: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Sum per-achievement contributor shares into institutions.

    ``shares`` maps achievement id -> person id -> share.  A share is divided
    evenly over the institutions that contributor listed on that achievement.
    """
    totals: dict[str, float] = defaultdict(float)
    for aid in sorted(shares):
        a = corpus.get(aid)
        by_person = {c.person: c for c in a.contributors}
        for person, share in sorted(shares[aid].items()):
            insts = by_person[person].institutions
            for inst in insts:
                if inst not in corpus.institutions:
                    raise UnknownInstitution(f"unknown institution {inst!r} on {aid!r}")
                totals[inst] += share / len(insts)
    return dict(sorted(totals.items()))


@dataclass(frozen=True)
class RankedRow:
    id: str
    name: str
    score: float
    rank: int
    tied: bool

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "score": self.score, "rank": self.rank, "tied": self.tied}


def _ordered(scores: Mapping[str, float], names: Mapping[str, str], first_end: Mapping[str, object]) -> list[RankedRow]:
    ids = sorted(scores, key=lambda i: (-scores[i], first_end[i], i))
    rows: list[RankedRow] = []
    for pos, i in enumerate(ids):
        if rows and abs(rows[-1].score - scores[i]) <= TIE_TOLERANCE:
            rank = rows[-1].rank
        else:
            rank = pos + 1
        rows.append(RankedRow(i, names[i], scores[i], rank, False))
    # competition ranking: a row is tied when it shares its rank
    counts = defaultdict(int)
    for r in rows:
        counts[r.rank] += 1
    return [RankedRow(r.id, r.name, r.score, r.rank, counts[r.rank] > 1) for r in rows]


TABLES = ("achievements", "contributors", "institutions")


@dataclass(frozen=True)
class RankingReport:
    achievement_scores: Mapping[str, float]
    contributor_scores: Mapping[str, float]
    institution_scores: Mapping[str, float]
    achievements: tuple[RankedRow, ...]
    contributors: tuple[RankedRow, ...]
    institutions: tuple[RankedRow, ...]
    shares: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def table(self, name: str) -> tuple[RankedRow, ...]:
        if name not in TABLES:
            raise ConfigError(f"unknown table {name!r}; choose from {', '.join(TABLES)}")
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {name: [r.to_dict() for r in self.table(name)] for name in TABLES}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_csv(self, name: str) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "name", "score", "rank"])
        for r in self.table(name):
            writer.writerow([r.id, r.name, f"{r.score:.12g}", r.rank])
        return buf.getvalue()

    def to_text(self, limit: int | None = None) -> str:
        out = []
        for name in TABLES:
            out.append(f"== {name} ==")
            for r in self.table(name)[:limit]:
                tie = "=" if r.tied else " "
                out.append(f"{r.rank:>4}{tie} {r.score:9.4f}  {r.name} [{r.id}]")
        return "\n".join(out) + "\n"


def rank_report(corpus: Corpus, selected: PragmaticEM | Iterable[str], graph: RelationGraph,
                params: RankParams) -> RankingReport:
    ids = list(selected.selected if isinstance(selected, PragmaticEM) else selected)
    a_scores = score_achievements(ids, graph, params)

    shares: dict[str, dict[str, float]] = {}
    people: dict[str, float] = defaultdict(float)
    person_name: dict[str, str] = {}
    person_end: dict[str, object] = {}
    inst_end: dict[str, object] = {}
    for aid in sorted(ids):
        a = corpus.get(aid)
        shares[aid] = contributor_shares(a, a_scores[aid], params)
        for c in a.contributors:
            people[c.person] += shares[aid][c.person]
            person_name.setdefault(c.person, c.name)
            person_end[c.person] = min(person_end.get(c.person, a.end), a.end)
            for inst in c.institutions:
                inst_end[inst] = min(inst_end.get(inst, a.end), a.end)
    i_scores = institution_rollup(corpus, shares)

    a_names = {aid: corpus.get(aid).title for aid in ids}
    a_end = {aid: corpus.get(aid).end for aid in ids}
    return RankingReport(
        achievement_scores=a_scores,
        contributor_scores=dict(sorted(people.items())),
        institution_scores=i_scores,
        achievements=tuple(_ordered(a_scores, a_names, a_end)),
        contributors=tuple(_ordered(people, person_name, person_end)),
        institutions=tuple(_ordered(i_scores, dict(corpus.institutions), inst_end)),
        shares=shares,
    )
