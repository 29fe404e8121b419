from __future__ import annotations

from pathlib import Path

import pytest

from evalrank.corpus import Corpus, ingest_corpus

FIXTURES = Path(__file__).parent / "fixtures"
FIXTURE_NAMES = ("chip-mini", "chip100-top", "table1")


def load(name: str) -> Corpus:
    return ingest_corpus((FIXTURES / f"{name}.json").read_bytes())


@pytest.fixture(scope="session")
def chip_mini() -> Corpus:
    return load("chip-mini")


@pytest.fixture(scope="session")
def chip100() -> Corpus:
    return load("chip100-top")


@pytest.fixture(scope="session")
def table1() -> Corpus:
    return load("table1")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # keep the call-phase report on the item so fixtures can see the outcome
    outcome = yield
    if call.when == "call":
        item.rep_call = outcome.get_result()
