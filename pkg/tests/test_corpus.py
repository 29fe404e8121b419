import copy
import datetime as dt
import json
import random

import pytest
from conftest import FIXTURES
from factory import random_corpus
from hypothesis import given, settings
from hypothesis import strategies as st

from evalrank.corpus import (
    TimeInterval,
    citation_closure,
    corpus_from_document,
    dumps_corpus,
    filter_corpus,
    ingest_corpus,
    parse_date,
)
from evalrank.errors import (
    DuplicateIntroducer,
    NonPositiveDim,
    ParseError,
    ReferentialError,
    SchemaError,
    TemporalError,
    UnknownAchievement,
    UnknownNode,
)

CHIP_FIELD = {"isa", "cisc", "risc", "x86", "risc-v", "von-neumann", "harvard"}
FULL = TimeInterval.parse("1900", "2100")


@pytest.fixture
def doc():
    return json.loads((FIXTURES / "chip-mini.json").read_text())


def achievement(doc, aid):
    return next(a for a in doc["achievements"] if a["id"] == aid)


# ---------------------------------------------------------------- dates

@pytest.mark.parametrize("token, lo, hi", [
    ("1945", dt.date(1945, 1, 1), dt.date(1945, 12, 31)),
    ("1940s", dt.date(1940, 1, 1), dt.date(1949, 12, 31)),
    ("2019-12-08", dt.date(2019, 12, 8), dt.date(2019, 12, 8)),
])
def test_date_tokens(token, lo, hi):
    assert parse_date(token) == lo
    assert parse_date(token, upper=True) == hi
    assert TimeInterval.parse(token) == TimeInterval(lo, hi)


@pytest.mark.parametrize("token", ["45", "1945-13-01", "1945-02-30", "1941s", "nineteen"])
def test_bad_date_tokens(token):
    with pytest.raises(ValueError):
        parse_date(token)


def test_interval_must_not_run_backwards():
    with pytest.raises(TemporalError):
        TimeInterval.parse("2000", "1999")


def test_range_text():
    assert TimeInterval.parse_range("1940s:2023") == TimeInterval(dt.date(1940, 1, 1), dt.date(2023, 12, 31))
    assert TimeInterval.parse_range("1999") == TimeInterval.parse("1999")
    with pytest.raises(TemporalError):
        TimeInterval.parse_range("2023:1940")


def test_closed_interval_relations():
    a = TimeInterval.parse("1990", "1995")
    touching = TimeInterval.parse("1995-12-31", "1997")
    after = TimeInterval.parse("1996")
    assert a.overlaps(touching) and touching.overlaps(a)
    assert not a.precedes(touching)
    assert a.precedes(after) and not a.overlaps(after)


# ---------------------------------------------------------------- ingestion

def test_chip_mini_loads(chip_mini):
    assert len(chip_mini) == 23
    assert chip_mini.taxonomy.root == "computing"
    assert chip_mini.get("x86").publication is None
    assert chip_mini.get("isa").introduces_ec_nodes == {"isa-design"}


def test_ingest_is_deterministic(doc):
    text = json.dumps(doc)
    a, b = ingest_corpus(text), ingest_corpus(text.encode())
    assert a == b and a.digest == b.digest


def test_digest_ignores_document_order(doc):
    shuffled = copy.deepcopy(doc)
    random.Random(3).shuffle(shuffled["achievements"])
    shuffled["taxonomy"].reverse()
    assert corpus_from_document(shuffled).digest == corpus_from_document(doc).digest


def test_round_trip(chip_mini):
    again = ingest_corpus(dumps_corpus(chip_mini))
    assert again == chip_mini
    assert dumps_corpus(again) == dumps_corpus(chip_mini)


def test_malformed_json_reports_position():
    with pytest.raises(ParseError) as info:
        ingest_corpus('{\n  "taxonomy": [,]\n}')
    assert (info.value.line, info.value.column) == (2, 16)


def test_missing_field_reports_path(doc):
    del achievement(doc, "risc")["key_problem"]
    with pytest.raises(SchemaError) as info:
        corpus_from_document(doc)
    assert "achievements[" in info.value.path and "key_problem" in str(info.value)


def test_mistyped_field(doc):
    achievement(doc, "isa")["references"] = "cisc"
    with pytest.raises(SchemaError):
        corpus_from_document(doc)


def test_unknown_key_strict_and_lenient(doc):
    achievement(doc, "isa")["note"] = "curator comment"
    doc["version"] = 2
    with pytest.raises(SchemaError):
        corpus_from_document(doc)
    assert len(corpus_from_document(doc, lenient=True)) == 23


def test_dangling_reference_names_both_ids(doc):
    achievement(doc, "risc")["references"].append("mips")
    with pytest.raises(ReferentialError) as info:
        corpus_from_document(doc)
    assert (info.value.source, info.value.target) == ("risc", "mips")
    assert "'risc'" in str(info.value) and "'mips'" in str(info.value)


def test_only_achievement_cites_missing_id(doc):
    only = achievement(doc, "isa")
    only["references"] = ["ghost"]
    doc["achievements"] = [only]
    with pytest.raises(ReferentialError):
        corpus_from_document(doc)


def test_self_reference(doc):
    achievement(doc, "isa")["references"] = ["isa"]
    with pytest.raises(ReferentialError):
        corpus_from_document(doc)


def test_citing_later_work(doc):
    a = achievement(doc, "lenet")
    a["begin"], a["end"] = "1990s", "1990s"
    achievement(doc, "alexnet")["references"] = []
    a["references"] = ["alexnet"]
    with pytest.raises(TemporalError):
        corpus_from_document(doc)


def test_overlapping_works_may_cite_each_other(doc):
    achievement(doc, "gpt")["references"] = ["bert"]
    assert corpus_from_document(doc).get("gpt").references == {"bert"}


def test_duplicate_introducer(doc):
    a = achievement(doc, "cisc")
    a["introduces_ec_nodes"] = ["isa-design"]
    with pytest.raises(DuplicateIntroducer):
        corpus_from_document(doc)


def test_introduced_node_must_be_mapped(doc):
    achievement(doc, "cisc")["introduces_ec_nodes"] = ["x86"]
    with pytest.raises(SchemaError):
        corpus_from_document(doc)


@pytest.mark.parametrize("value", [0, -3])
def test_non_positive_dimension(doc, value):
    achievement(doc, "isa")["dims"][0]["value"] = value
    with pytest.raises(NonPositiveDim):
        corpus_from_document(doc)


def test_key_problem_level(doc):
    achievement(doc, "isa")["key_problem"] = "isa-concept"
    with pytest.raises(SchemaError):
        corpus_from_document(doc)


def test_key_problem_must_cover_mapping(doc):
    achievement(doc, "isa")["key_problem"] = "image-recognition"
    with pytest.raises(SchemaError):
        corpus_from_document(doc)


def test_unknown_institution(doc):
    achievement(doc, "isa")["contributors"][0]["institutions"] = ["nowhere"]
    with pytest.raises(ReferentialError):
        corpus_from_document(doc)


def test_author_positions_contiguous(doc):
    achievement(doc, "isa")["contributors"][2]["position"] = 5
    with pytest.raises(SchemaError):
        corpus_from_document(doc)


def test_unknown_ec_node(doc):
    achievement(doc, "isa")["ec_mapping"].append("quantum")
    with pytest.raises(ReferentialError):
        corpus_from_document(doc)


# ---------------------------------------------------------------- views

def test_filter_to_chip_field(chip_mini):
    scoped = filter_corpus(chip_mini, TimeInterval.parse("1940-01-01", "2023-12-31"), "chip")
    assert set(scoped.achievements) == CHIP_FIELD


def test_filter_disjoint_timeframe(chip_mini):
    assert len(filter_corpus(chip_mini, TimeInterval.parse("3000", "3001"), "chip")) == 0


def test_filter_isa_branch(chip_mini):
    assert set(filter_corpus(chip_mini, FULL, "isa-design").achievements) == {"isa", "cisc", "risc", "x86", "risc-v"}


def test_filter_uses_intersection(chip_mini):
    scoped = filter_corpus(chip_mini, TimeInterval.parse("1977", "1979"), "computing")
    assert {"cisc", "x86"} <= set(scoped.achievements)


def test_filter_prunes_references(chip_mini):
    scoped = filter_corpus(chip_mini, TimeInterval.parse("1978", "2023"), "chip")
    assert "isa" not in scoped.achievements
    assert scoped.get("risc").references == frozenset()
    assert scoped.get("x86").references == frozenset()


def test_filter_unknown_field(chip_mini):
    with pytest.raises(UnknownNode):
        filter_corpus(chip_mini, FULL, "astronomy")


def test_citation_closure_examples(chip_mini):
    assert citation_closure(chip_mini, "isa") == {"cisc", "risc", "x86", "risc-v"}
    assert citation_closure(chip_mini, "risc-v") == frozenset()
    assert citation_closure(chip_mini, "risc") == {"risc-v"}
    with pytest.raises(UnknownAchievement):
        citation_closure(chip_mini, "nope")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1960, 1980), st.integers(0, 10), st.sampled_from(["root", "q0", "q1m1"]))
def test_filter_idempotent_and_shrinking(seed, start, width, field):
    corpus = random_corpus(random.Random(seed), 25)
    window = TimeInterval.parse(str(start), str(start + width))
    once = filter_corpus(corpus, window, field)
    assert set(once.achievements) <= set(corpus.achievements)
    assert filter_corpus(once, window, field) == once


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_direct_citers_respect_time(seed):
    corpus = random_corpus(random.Random(seed), 30, ref_p=0.3)
    for a in corpus:
        closure = citation_closure(corpus, a.id)
        assert a.id not in closure
        direct = {x.id for x in corpus if a.id in x.references}
        assert direct <= closure
        assert all(not (corpus.get(x).end < a.begin) for x in direct)


@pytest.mark.parametrize("name", ["chip-mini", "chip100-top", "table1"])
def test_fixture_closures_respect_time(name):
    from conftest import load
    corpus = load(name)
    for a in corpus:
        assert all(not (corpus.get(x).end < a.begin) for x in citation_closure(corpus, a.id))


def test_transitive_citers_can_end_earlier(doc):
    # per-edge time checks allow chains through overlapping works
    for aid, (begin, end), refs in [("gotoblas2", ("2008", "2010"), []),
                                    ("openblas", ("2006", "2008"), ["gotoblas2"])]:
        a = achievement(doc, aid)
        a["begin"], a["end"], a["references"] = begin, end, refs
    early = copy.deepcopy(achievement(doc, "openblas"))
    early.update(id="early-blas", begin="2005", end="2006", references=["openblas"], introduces_ec_nodes=[])
    doc["achievements"].append(early)
    corpus = corpus_from_document(doc)
    assert "early-blas" in citation_closure(corpus, "gotoblas2")
    assert corpus.get("early-blas").end < corpus.get("gotoblas2").begin
