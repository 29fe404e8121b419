"""Achievement corpus: data model, JSON ingestion and views.

The JSON document has three top-level keys::

    {
      "taxonomy":     [{"id", "level", "label", "parent"?}, ...],
      "institutions": {"<id>": "<display name>", ...},
      "achievements": [{"id", "title", "begin", "end", "ec_mapping",
                        "key_problem", "introduces_ec_nodes", "references",
                        "dims", "contributors", "publication"?}, ...]
    }

Dates are ``YYYY``, ``YYYY-MM-DD`` or a decade token ``YYYYs``.  A year or
decade used as ``begin`` expands to its first day, as ``end`` to its last.
"""
from __future__ import annotations

import datetime as dt
import hashlib
import json
import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Any, Iterable, Mapping

import jsonschema

from .errors import (
    DuplicateIntroducer,
    NonPositiveDim,
    ParseError,
    ReferentialError,
    SchemaError,
    TemporalError,
    UnknownAchievement,
)
from .taxonomy import PROBLEM_LEVELS, ECLevel, ECNode, Taxonomy, subtree_ids, validate_taxonomy

_DATE_RE = re.compile(r"^(\d{4})(s|-(\d{2})-(\d{2}))?$")


def parse_date(token: str, *, upper: bool = False) -> dt.date:
    """Parse a date token; ``upper`` selects the last day of a year/decade."""
    m = _DATE_RE.match(token)
    if not m:
        raise ValueError(f"bad date token {token!r}")
    year = int(m.group(1))
    if m.group(2) == "s":
        if year % 10:
            raise ValueError(f"decade token must end in 0: {token!r}")
        return dt.date(year + 9, 12, 31) if upper else dt.date(year, 1, 1)
    if m.group(2):
        return dt.date(year, int(m.group(3)), int(m.group(4)))
    return dt.date(year, 12, 31) if upper else dt.date(year, 1, 1)


@dataclass(frozen=True, order=True)
class TimeInterval:
    begin: dt.date
    end: dt.date

    def __post_init__(self) -> None:
        if self.begin > self.end:
            raise TemporalError(f"interval begins after it ends: {self.begin} > {self.end}")

    @classmethod
    def parse(cls, begin: str, end: str | None = None) -> "TimeInterval":
        return cls(parse_date(begin), parse_date(begin if end is None else end, upper=True))

    @classmethod
    def parse_range(cls, text: str) -> "TimeInterval":
        """``"1940s:2023"`` style range; a single token spans itself."""
        lo, sep, hi = text.partition(":")
        try:
            return cls.parse(lo, hi if sep else None)
        except ValueError as exc:
            raise TemporalError(str(exc)) from None

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.begin <= other.end and other.begin <= self.end

    def precedes(self, other: "TimeInterval") -> bool:
        """Strictly earlier: this interval ends before ``other`` begins."""
        return self.end < other.begin


class Role(str, Enum):
    FirstAuthor = "FirstAuthor"
    CorrespondingAuthor = "CorrespondingAuthor"
    EqualContribution = "EqualContribution"


class Orientation(str, Enum):
    Positive = "Positive"
    Negative = "Negative"


@dataclass(frozen=True)
class Contributor:
    person: str
    name: str
    position: int
    institutions: tuple[str, ...]
    roles: frozenset[Role] = frozenset()


@dataclass(frozen=True)
class SignificanceDim:
    name: str
    value: float
    orientation: Orientation = Orientation.Positive


@dataclass(frozen=True)
class Publication:
    venue: str
    citation_count: int


@dataclass(frozen=True)
class Achievement:
    id: str
    title: str
    interval: TimeInterval
    ec_mapping: frozenset[str]
    key_problem: str
    contributors: tuple[Contributor, ...]
    references: frozenset[str] = frozenset()
    dims: tuple[SignificanceDim, ...] = ()
    introduces_ec_nodes: frozenset[str] = frozenset()
    publication: Publication | None = None

    @property
    def begin(self) -> dt.date:
        return self.interval.begin

    @property
    def end(self) -> dt.date:
        return self.interval.end


def chrono_key(a: Achievement) -> tuple[dt.date, dt.date, str]:
    """Completion order: end, then begin, then id."""
    return (a.end, a.begin, a.id)


@dataclass(frozen=True)
class Corpus:
    taxonomy: Taxonomy
    achievements: Mapping[str, Achievement]
    institutions: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ordered = {k: self.achievements[k] for k in sorted(self.achievements)}
        object.__setattr__(self, "achievements", MappingProxyType(ordered))
        object.__setattr__(self, "institutions", MappingProxyType(dict(sorted(self.institutions.items()))))

    def __len__(self) -> int:
        return len(self.achievements)

    def __iter__(self):
        return iter(self.achievements.values())

    def get(self, achievement_id: str) -> Achievement:
        try:
            return self.achievements[achievement_id]
        except KeyError:
            raise UnknownAchievement(f"unknown achievement {achievement_id!r}") from None

    def to_document(self) -> dict[str, Any]:
        return corpus_to_document(self)

    @property
    def digest(self) -> str:
        cached = self.__dict__.get("_digest")
        if cached is None:
            blob = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
            cached = hashlib.sha256(blob.encode()).hexdigest()
            object.__setattr__(self, "_digest", cached)
        return cached


# --------------------------------------------------------------------------
# schema


def _schema(strict: bool) -> dict[str, Any]:
    extra = not strict
    ident = {"type": "string", "minLength": 1}
    ids = {"type": "array", "items": ident}
    date = {"type": "string", "pattern": _DATE_RE.pattern}
    return {
        "type": "object",
        "additionalProperties": extra,
        "required": ["taxonomy", "institutions", "achievements"],
        "properties": {
            "taxonomy": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": extra,
                    "required": ["id", "level", "label"],
                    "properties": {
                        "id": ident,
                        "level": {"enum": [lv.name for lv in ECLevel]},
                        "label": {"type": "string"},
                        "parent": {"anyOf": [ident, {"type": "null"}]},
                    },
                },
            },
            "institutions": {"type": "object", "additionalProperties": {"type": "string"}},
            "achievements": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": extra,
                    "required": [
                        "id", "title", "begin", "end", "ec_mapping", "key_problem",
                        "introduces_ec_nodes", "references", "dims", "contributors",
                    ],
                    "properties": {
                        "id": ident,
                        "title": {"type": "string"},
                        "begin": date,
                        "end": date,
                        "ec_mapping": {**ids, "minItems": 1},
                        "key_problem": ident,
                        "introduces_ec_nodes": ids,
                        "references": ids,
                        "dims": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "additionalProperties": extra,
                                "required": ["name", "value", "orientation"],
                                "properties": {
                                    "name": {"type": "string"},
                                    "value": {"type": "number"},
                                    "orientation": {"enum": [o.value for o in Orientation]},
                                },
                            },
                        },
                        "contributors": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "additionalProperties": extra,
                                "required": ["person", "name", "position", "roles", "institutions"],
                                "properties": {
                                    "person": ident,
                                    "name": {"type": "string"},
                                    "position": {"type": "integer", "minimum": 1},
                                    "roles": {
                                        "type": "array",
                                        "items": {"enum": [r.value for r in Role]},
                                    },
                                    "institutions": {**ids, "minItems": 1},
                                },
                            },
                        },
                        "publication": {
                            "type": "object",
                            "additionalProperties": extra,
                            "required": ["venue", "citation_count"],
                            "properties": {
                                "venue": {"type": "string"},
                                "citation_count": {"type": "integer", "minimum": 0},
                            },
                        },
                    },
                },
            },
        },
    }


_VALIDATORS = {
    strict: jsonschema.Draft202012Validator(_schema(strict)) for strict in (True, False)
}


def _first_schema_error(doc: Any, strict: bool) -> None:
    errors = sorted(
        _VALIDATORS[strict].iter_errors(doc),
        key=lambda e: (list(map(str, e.absolute_path)), e.message),
    )
    if errors:
        err = errors[0]
        raise SchemaError(err.message, err.json_path)


# --------------------------------------------------------------------------
# ingestion


def ingest_corpus(document: str | bytes, *, lenient: bool = False) -> Corpus:
    """Parse and validate a corpus JSON document."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return corpus_from_document(doc, lenient=lenient)


def corpus_from_document(doc: Any, *, lenient: bool = False) -> Corpus:
    _first_schema_error(doc, strict=not lenient)

    taxonomy = validate_taxonomy(
        ECNode(n["id"], ECLevel[n["level"]], n["label"], n.get("parent"))
        for n in doc["taxonomy"]
    )

    achievements = []
    seen: set[str] = set()
    for i, raw in enumerate(doc["achievements"]):
        path = f"$.achievements[{i}]"
        if raw["id"] in seen:
            raise SchemaError(f"duplicate achievement id {raw['id']!r}", f"{path}.id")
        seen.add(raw["id"])
        achievements.append(_achievement_from_raw(raw, path))

    corpus = Corpus(taxonomy, {a.id: a for a in achievements}, dict(doc["institutions"]))
    check_corpus(corpus)
    return corpus


def _achievement_from_raw(raw: Mapping[str, Any], path: str) -> Achievement:
    try:
        interval = TimeInterval(parse_date(raw["begin"]), parse_date(raw["end"], upper=True))
    except ValueError as exc:
        raise SchemaError(str(exc), path) from None
    except TemporalError as exc:
        raise TemporalError(f"{path} ({raw['id']}): {exc}") from None

    dims = []
    for j, d in enumerate(raw["dims"]):
        if not d["value"] > 0:
            raise NonPositiveDim(f"dimension {d['name']!r} must be > 0, got {d['value']}",
                                 f"{path}.dims[{j}].value")
        dims.append(SignificanceDim(d["name"], float(d["value"]), Orientation(d["orientation"])))

    contributors = tuple(
        sorted(
            (
                Contributor(
                    person=c["person"],
                    name=c["name"],
                    position=c["position"],
                    institutions=tuple(c["institutions"]),
                    roles=frozenset(Role(r) for r in c["roles"]),
                )
                for c in raw["contributors"]
            ),
            key=lambda c: c.position,
        )
    )
    pub = raw.get("publication")
    return Achievement(
        id=raw["id"],
        title=raw["title"],
        interval=interval,
        ec_mapping=frozenset(raw["ec_mapping"]),
        key_problem=raw["key_problem"],
        contributors=contributors,
        references=frozenset(raw["references"]),
        dims=tuple(dims),
        introduces_ec_nodes=frozenset(raw["introduces_ec_nodes"]),
        publication=Publication(pub["venue"], pub["citation_count"]) if pub else None,
    )


def check_corpus(corpus: Corpus) -> Corpus:
    """Validate every cross-record invariant; returns the corpus unchanged."""
    tax = corpus.taxonomy
    introducer: dict[str, str] = {}
    for a in corpus:
        path = f"achievement {a.id!r}"
        if not a.contributors:
            raise SchemaError("needs at least one contributor", path)
        positions = sorted(c.position for c in a.contributors)
        if positions != list(range(1, len(positions) + 1)):
            raise SchemaError(f"author positions {positions} are not 1..{len(positions)}", path)
        persons = [c.person for c in a.contributors]
        if len(set(persons)) != len(persons):
            raise SchemaError("a person is listed twice", path)
        for c in a.contributors:
            if not c.institutions:
                raise SchemaError(f"contributor {c.person!r} has no institution", path)
            for inst in c.institutions:
                if inst not in corpus.institutions:
                    raise ReferentialError("unknown institution", a.id, inst)
        for d in a.dims:
            if not d.value > 0:
                raise NonPositiveDim(f"dimension {d.name!r} must be > 0", path)
        if not a.ec_mapping:
            raise SchemaError("ec_mapping is empty", path)
        for n in sorted(a.ec_mapping | {a.key_problem}):
            if n not in tax:
                raise ReferentialError("unknown EC node", a.id, n)
        if tax.nodes[a.key_problem].level not in PROBLEM_LEVELS:
            raise SchemaError(
                f"key_problem {a.key_problem!r} is a {tax.nodes[a.key_problem].level.name}", path
            )
        if a.key_problem not in a.ec_mapping and not any(
            a.key_problem in tax.ancestors(n) for n in a.ec_mapping
        ):
            raise SchemaError(f"key_problem {a.key_problem!r} is not mapped or above a mapped node", path)
        extra = a.introduces_ec_nodes - a.ec_mapping
        if extra:
            raise SchemaError(f"introduced nodes {sorted(extra)} are not in ec_mapping", path)
        for n in sorted(a.introduces_ec_nodes):
            if n in introducer:
                raise DuplicateIntroducer(f"EC node {n!r} introduced by both {introducer[n]!r} and {a.id!r}")
            introducer[n] = a.id
        for r in sorted(a.references):
            if r == a.id:
                raise ReferentialError("self reference", a.id, r)
            if r not in corpus.achievements:
                raise ReferentialError("unknown reference", a.id, r)
            cited = corpus.achievements[r]
            if a.interval.precedes(cited.interval):
                raise TemporalError(
                    f"{a.id!r} (ends {a.end}) cites later work {r!r} (begins {cited.begin})"
                )
    return corpus


# --------------------------------------------------------------------------
# serialization


def _date_str(d: dt.date) -> str:
    return d.isoformat()


def achievement_to_raw(a: Achievement) -> dict[str, Any]:
    raw: dict[str, Any] = {
        "id": a.id,
        "title": a.title,
        "begin": _date_str(a.begin),
        "end": _date_str(a.end),
        "ec_mapping": sorted(a.ec_mapping),
        "key_problem": a.key_problem,
        "introduces_ec_nodes": sorted(a.introduces_ec_nodes),
        "references": sorted(a.references),
        "dims": [{"name": d.name, "value": d.value, "orientation": d.orientation.value} for d in a.dims],
        "contributors": [
            {
                "person": c.person,
                "name": c.name,
                "position": c.position,
                "roles": sorted(r.value for r in c.roles),
                "institutions": list(c.institutions),
            }
            for c in a.contributors
        ],
    }
    if a.publication is not None:
        raw["publication"] = {"venue": a.publication.venue, "citation_count": a.publication.citation_count}
    return raw


def corpus_to_document(corpus: Corpus) -> dict[str, Any]:
    taxonomy = []
    for n in sorted(corpus.taxonomy.nodes.values(), key=lambda n: (n.level, n.id)):
        entry: dict[str, Any] = {"id": n.id, "level": n.level.name, "label": n.label}
        if n.parent is not None:
            entry["parent"] = n.parent
        taxonomy.append(entry)
    return {
        "taxonomy": taxonomy,
        "institutions": dict(corpus.institutions),
        "achievements": [achievement_to_raw(a) for a in corpus],
    }


def dumps_corpus(corpus: Corpus) -> str:
    return json.dumps(corpus.to_document(), indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# views


def filter_corpus(corpus: Corpus, timeframe: TimeInterval, field: str) -> Corpus:
    """Achievements intersecting ``timeframe`` and mapped under ``field``.

    References to dropped achievements are removed; the taxonomy is kept whole.
    """
    scope = subtree_ids(corpus.taxonomy, field)
    kept = {
        a.id: a
        for a in corpus
        if a.interval.overlaps(timeframe) and a.ec_mapping & scope
    }
    pruned = {
        aid: a if a.references <= kept.keys() else replace(a, references=a.references & kept.keys())
        for aid, a in kept.items()
    }
    return Corpus(corpus.taxonomy, pruned, corpus.institutions)


def citing_index(corpus: Corpus) -> dict[str, set[str]]:
    """Reverse reference map: achievement id -> ids of works that cite it."""
    index: dict[str, set[str]] = {aid: set() for aid in corpus.achievements}
    for a in corpus:
        for r in a.references:
            index[r].add(a.id)
    return index


def citation_closure(corpus: Corpus, achievement_id: str) -> frozenset[str]:
    """Every work that cites ``achievement_id`` directly or transitively."""
    corpus.get(achievement_id)
    index = citing_index(corpus)
    seen: set[str] = set()
    queue = deque([achievement_id])
    while queue:
        for citer in index[queue.popleft()]:
            if citer not in seen and citer != achievement_id:
                seen.add(citer)
                queue.append(citer)
    return frozenset(seen)


def build_corpus(
    taxonomy: Taxonomy | Iterable[ECNode],
    achievements: Iterable[Achievement],
    institutions: Mapping[str, str],
) -> Corpus:
    """Programmatic constructor with the same checks as :func:`ingest_corpus`."""
    if not isinstance(taxonomy, Taxonomy):
        taxonomy = validate_taxonomy(taxonomy)
    items = list(achievements)
    by_id = {a.id: a for a in items}
    if len(by_id) != len(items):
        raise SchemaError("duplicate achievement id")
    return check_corpus(Corpus(taxonomy, by_id, institutions))

