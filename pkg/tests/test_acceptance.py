"""Acceptance suite: one test per release criterion, one PASS/FAIL line each.

Run on its own with ``pytest tests/test_acceptance.py -s`` or
``python tests/test_acceptance.py``; the verdict lines are also written to
the terminal when output capture is on.
"""
from __future__ import annotations

import math
import os
import random
import subprocess
import sys
import time

import pytest
from checks import COMMANDS, assert_prefix_per_group, check_trace
from conftest import FIXTURE_NAMES, FIXTURES, load
from factory import abundant_corpus, random_corpus
from oracle import graph_triples, naive_edges, naive_pioneers

from evalrank.baselines import CitationRecord, JournalYearRecord, citation_ranking, h_index, impact_factor
from evalrank.corpus import Achievement, Contributor, Role, TimeInterval
from evalrank.evolution import build_evolution_trace
from evalrank.pruning import PruneConfig, prune, select_top_n
from evalrank.ranking import RankParams, contributor_shares, rank_report, score_achievements
from evalrank.relations import RelationEdge, RelationGraph, RelationKind, classify_relationships, many_to_one_groups

P, G, R = "Progressive", "Parallel", "RelatedNotConnected"
CHIP_MINI_EDGES = {
    ("isa", "cisc", P), ("isa", "risc", P), ("risc", "risc-v", P), ("cisc", "x86", P),
    ("lenet", "alexnet", P), ("gotoblas2", "openblas", P),
    ("tpc-c", "ch-benchmark", P), ("tpc-h", "ch-benchmark", P),
    ("harvard", "von-neumann", G), ("bert", "gpt", G), ("centos", "ubuntu", G),
    ("bigbench", "bigdatabench", G),
    ("tpc-c", "tpc-e", R), ("condconv", "dynamic-conv", R),
}
UNPUBLISHED = {"linux-kernel", "git", "mysql", "x86", "pcb", "whetstone", "tpc-c", "tpc-h", "fio"}
TOP_FIVE = {"John von Neumann", "Maurice Wilkes", "Frederick Brooks", "David A. Patterson", "Gene Amdahl"}


@pytest.fixture
def verdict(request, pytestconfig):
    """Yields a recorder; prints exactly one PASS/FAIL line when the test ends."""
    notes: list[str] = []
    yield notes.append
    failed = getattr(request.node, "rep_call", None) is None or request.node.rep_call.failed
    line = f"ACCEPTANCE {request.node.name.removeprefix('test_')}: {'FAIL' if failed else 'PASS'}"
    if notes:
        line += f" ({'; '.join(notes)})"
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n" + line, flush=True)


# ---------------------------------------------------------------- relations

def test_relationship_fixture(verdict):
    corpus = load("chip-mini")
    start = time.perf_counter()
    graph = classify_relationships(corpus)
    elapsed = time.perf_counter() - start
    verdict(f"{len(graph.edges)} edges in {elapsed * 1000:.1f} ms")
    assert graph.pioneers == {"isa", "von-neumann"}
    assert graph_triples(graph) == CHIP_MINI_EDGES
    assert elapsed < 1.0


def test_oracle_equivalence(verdict):
    rng = random.Random(20240501)
    start = time.perf_counter()
    for _ in range(200):
        corpus = random_corpus(random.Random(rng.getrandbits(32)), rng.randint(0, 50))
        graph = classify_relationships(corpus)
        assert graph.pioneers == naive_pioneers(corpus)
        assert graph_triples(graph) == naive_edges(corpus)
    elapsed = time.perf_counter() - start
    verdict(f"200 corpora in {elapsed:.2f} s")
    assert elapsed < 30.0


def test_many_to_one(verdict):
    groups = many_to_one_groups(classify_relationships(load("chip-mini")))
    verdict(repr([(sorted(s), t) for s, t in groups]))
    assert groups == [(frozenset({"tpc-c", "tpc-h"}), "ch-benchmark")]


# ---------------------------------------------------------------- evolution

def test_evolution_trace(verdict):
    for name in FIXTURE_NAMES:
        check_trace(load(name))
    rng = random.Random(7)
    for _ in range(100):
        check_trace(random_corpus(random.Random(rng.getrandbits(32)), rng.randint(0, 40)))
    verdict(f"{len(FIXTURE_NAMES)} fixtures + 100 random corpora")


# ---------------------------------------------------------------- pruning

def test_pruning_budget(verdict):
    for n, (bp, bg) in {5: (2, 3), 10: (4, 6), 100: (40, 60)}.items():
        assert PruneConfig(n=n).budgets() == (bp, bg)
        for seed in range(5):
            rng = random.Random(1000 * n + seed)
            corpus = abundant_corpus(rng, bp + rng.randint(0, 3), bg + rng.randint(0, 5), noise=rng.randint(0, 2))
            graph = classify_relationships(corpus)
            assert len(graph.pioneers) >= n * 0.4
            assert len(corpus) - len(graph.pioneers) >= n * 0.6
            pem = prune(corpus, graph, build_evolution_trace(corpus, graph), PruneConfig(n=n))
            pioneers = sum(a in graph.pioneers for a in pem.selected)
            assert (pioneers, len(pem) - pioneers) == (bp, bg)

    rng = random.Random(99)
    for _ in range(500):
        corpus = random_corpus(random.Random(rng.getrandbits(32)), rng.randint(1, 40), ref_p=rng.random() * 0.5)
        n = rng.randint(1, 45)
        graph = classify_relationships(corpus)
        pem = prune(corpus, graph, None, PruneConfig(n=n))
        assert len(pem) == min(n, len(corpus))
        assert_prefix_per_group(corpus, pem)
    verdict("N in {5, 10, 100} split exactly; dominance held in 500/500 trials")


# ---------------------------------------------------------------- scoring

def _authors(*roles):
    people = tuple(
        Contributor(f"p{pos}", f"P{pos}", pos, ("i1",), frozenset(r)) for pos, r in enumerate(roles, start=1)
    )
    return Achievement("x", "x", TimeInterval.parse("2000"), frozenset({"n"}), "n", people)


def test_scoring_arithmetic(verdict):
    params = RankParams()
    cases = [
        (_authors((), ()), [0.5, 0.5]),
        (_authors((), (), (), (), ()), [0.3, 0.4 / 3, 0.4 / 3, 0.4 / 3, 0.3]),
        (_authors({Role.FirstAuthor}, {Role.FirstAuthor}, (), {Role.CorrespondingAuthor}), [0.15, 0.15, 0.4, 0.3]),
    ]
    for achievement, expected in cases:
        shares = contributor_shares(achievement, 1.0, params)
        got = [shares[f"p{i}"] for i in range(1, len(expected) + 1)]
        assert all(abs(g - e) <= 1e-12 for g, e in zip(got, expected)), got

    single = RelationGraph({"p"}, (RelationEdge("p", "c", RelationKind.Progressive),))
    assert score_achievements(["p", "c"], single, RankParams(pioneering_weight=0.2))["p"] == 1.2

    rng = random.Random(314)
    worst = 0.0
    for _ in range(500):
        corpus = random_corpus(random.Random(rng.getrandbits(32)), rng.randint(1, 30), ref_p=0.35, intro_p=0.35)
        p = RankParams(rng.choice([0.0, rng.uniform(0.01, 1.0)]), rng.uniform(0, 0.5), rng.uniform(0, 0.5))
        scoped, graph, pem = select_top_n(corpus, PruneConfig(n=rng.randint(1, 40)))
        report = rank_report(scoped, pem, graph, p)
        total = math.fsum(report.achievement_scores.values())
        for table in (report.contributor_scores, report.institution_scores):
            drift = abs(math.fsum(table.values()) - total)
            worst = max(worst, drift)
            assert drift <= 1e-9
    verdict(f"worst mass drift {worst:.1e} over 500 corpora")


# ---------------------------------------------------------------- baselines

def _brute_h(cites):
    return max(h for h in range(len(cites) + 1) if sum(c >= h for c in cites) >= h)


def test_baselines(verdict):
    rng = random.Random(2718)
    for _ in range(10_000):
        cites = [rng.randrange(50) for _ in range(rng.randrange(30))]
        assert h_index(CitationRecord(cites)) == _brute_h(cites)

    for _ in range(100):
        items = [rng.randrange(1, 400) for _ in range(2)]
        citations = rng.randrange(5000)
        assert impact_factor(JournalYearRecord(citations, items)) == citations / (items[0] + items[1])

    table1 = load("table1")
    ranking = [aid for aid, _ in citation_ranking(table1)]
    tail = ranking[len(ranking) - len(UNPUBLISHED):]
    assert set(tail) == UNPUBLISHED
    scoped, graph, pem = select_top_n(table1, PruneConfig(n=100))
    report = rank_report(scoped, pem, graph, RankParams())
    ranked = {row.id: row.rank for row in report.achievements}
    assert UNPUBLISHED <= set(ranked)
    assert all(report.achievement_scores[a] >= 1.0 for a in UNPUBLISHED)
    # the contrast: some unpublished entry outranks a published one
    best_unpublished = min(ranked[a] for a in UNPUBLISHED)
    worst_published = max(ranked[a] for a in ranked if a not in UNPUBLISHED)
    assert best_unpublished < worst_published
    verdict(f"unpublished last by citations; best unpublished evaluatology rank {best_unpublished}")


# ---------------------------------------------------------------- golden ordering

def test_chip100_golden_ordering(verdict):
    scoped, graph, pem = select_top_n(load("chip100-top"), PruneConfig(n=100))
    top = rank_report(scoped, pem, graph, RankParams()).contributors[:5]
    verdict(", ".join(f"{r.name} {r.score:g}" for r in top))
    assert {r.name for r in top} == TOP_FIVE


# ---------------------------------------------------------------- determinism

def _cli_outputs(hash_seed: str) -> dict[tuple[str, str], bytes]:
    env = {**os.environ, "PYTHONHASHSEED": hash_seed}
    outputs = {}
    for name in FIXTURE_NAMES:
        path = str(FIXTURES / f"{name}.json")
        for label, args in sorted(COMMANDS.items()):
            proc = subprocess.run([sys.executable, "-m", "evalrank", args[0], path, *args[1:]],
                                  capture_output=True, env=env, check=False)
            assert proc.returncode == 0, proc.stderr
            outputs[name, label] = proc.stdout
    return outputs


def test_determinism(verdict):
    runs = [_cli_outputs(seed) for seed in ("1", "2", "3")]
    differing = [key for key in runs[0] if len({r[key] for r in runs}) != 1]
    verdict(f"{len(runs[0])} command/fixture pairs x 3 processes, {len(differing)} differing")
    assert not differing, differing


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
