"""Bibliometric baselines used for contrast: h-index, impact factor and
citation / venue-count rankings over the same corpus."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Corpus
from .errors import SchemaError, UndefinedDenominator


@dataclass(frozen=True)
class CitationRecord:
    citations: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "citations", tuple(self.citations))
        if any(c < 0 for c in self.citations):
            raise SchemaError("citation counts must be non-negative")


@dataclass(frozen=True)
class JournalYearRecord:
    citations_in_year: int
    citable_items_per_prior_year: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "citable_items_per_prior_year", tuple(self.citable_items_per_prior_year))
        if self.citations_in_year < 0 or any(p < 0 for p in self.citable_items_per_prior_year):
            raise SchemaError("counts must be non-negative")


def h_index(record: CitationRecord | Sequence[int]) -> int:
    cites = record.citations if isinstance(record, CitationRecord) else tuple(record)
    h = 0
    for i, c in enumerate(sorted(cites, reverse=True), start=1):
        if c < i:
            break
        h = i
    return h


def impact_factor(record: JournalYearRecord) -> float:
    items = sum(record.citable_items_per_prior_year)
    if items <= 0:
        raise UndefinedDenominator("no citable items in the window")
    return record.citations_in_year / items


def citation_ranking(corpus: Corpus) -> list[tuple[str, int]]:
    """Achievements by citation count; those without a publication come last."""
    def key(a):
        has_pub = a.publication is not None
        return (not has_pub, -(a.publication.citation_count if has_pub else 0), a.id)

    return [
        (a.id, a.publication.citation_count if a.publication else 0)
        for a in sorted(corpus, key=key)
    ]


def venue_count_ranking(corpus: Corpus, venues: Iterable[str]) -> list[tuple[str, int]]:
    """Per contributor, how many achievements appeared at one of ``venues``."""
    venues = set(venues)
    counts: Counter[str] = Counter()
    for a in corpus:
        hit = a.publication is not None and a.publication.venue in venues
        for c in a.contributors:
            counts[c.person] += int(hit)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
