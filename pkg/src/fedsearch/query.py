"""Query model, tokenization, keyword scoring, and field-constraint matching.

Scoring is pure integer arithmetic so every node ranks identically:

    score = sum over query tokens t of
        3*tf(t, title) + 2*tf(t, keywords) + 1*tf(t, abstract)
        + 1*tf(t, authors) + 1*tf(t, venue)

where tf counts token occurrences after tokenize(). Multivariate matches
are an AND over field predicates and all score 1, so they rank by id.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidQueryError
from .records import PublicationRecord

KIND_KEYWORD = "keyword"
KIND_MULTIVARIATE = "multivariate"

TEXT_PREDICATE_FIELDS = ("title", "authors", "keywords", "venue")

TITLE_WEIGHT = 3
KEYWORDS_WEIGHT = 2
ABSTRACT_WEIGHT = 1
AUTHORS_WEIGHT = 1
VENUE_WEIGHT = 1

_ASCII_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on every non-alphanumeric codepoint, drop empties.

    No stemming, order preserved. The regex fast path is exact for ASCII;
    other codepoints take the per-character path.
    """
    lowered = text.lower()
    if lowered.isascii():
        return _ASCII_TOKEN.findall(lowered)
    tokens: list[str] = []
    current: list[str] = []
    for ch in lowered:
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


@dataclass(frozen=True, slots=True)
class FieldPredicate:
    """Exact-token constraint on a text field; multi-token values are an AND."""

    field: str
    token: str


@dataclass(frozen=True, slots=True)
class YearRange:
    lo: int
    hi: int


Constraint = FieldPredicate | YearRange


@dataclass(frozen=True, slots=True)
class Query:
    kind: str
    text: str = ""
    constraints: tuple[Constraint, ...] = ()
    top_k: int = 10


def validate_query(query: Query) -> None:
    if query.kind not in (KIND_KEYWORD, KIND_MULTIVARIATE):
        raise InvalidQueryError(f"unknown query kind {query.kind!r}")
    if query.top_k < 1:
        raise InvalidQueryError("top_k must be >= 1")
    if query.kind == KIND_KEYWORD:
        if not tokenize(query.text):
            raise InvalidQueryError("keyword query text has no tokens")
    else:
        if not query.constraints:
            raise InvalidQueryError("multivariate query needs at least one constraint")
        for c in query.constraints:
            if isinstance(c, YearRange):
                if c.lo > c.hi:
                    raise InvalidQueryError(f"year range {c.lo}..{c.hi} has lo > hi")
            else:
                if c.field not in TEXT_PREDICATE_FIELDS:
                    raise InvalidQueryError(f"unknown predicate field {c.field!r}")
                if not tokenize(c.token):
                    raise InvalidQueryError(f"predicate on {c.field!r} has no tokens")


def field_tokens(record: PublicationRecord, fieldname: str) -> list[str]:
    if fieldname == "title":
        return tokenize(record.title)
    if fieldname == "abstract":
        return tokenize(record.abstract)
    if fieldname == "venue":
        return tokenize(record.venue)
    if fieldname == "authors":
        return [t for name in record.authors for t in tokenize(name)]
    if fieldname == "keywords":
        return [t for kw in record.keywords for t in tokenize(kw)]
    raise ValueError(f"no such field {fieldname!r}")


def score_keyword(record: PublicationRecord, query_tokens: list[str]) -> int:
    """Field-weighted term-frequency score; exact integer, duplicates count."""
    if not query_tokens:
        raise ValueError("query_tokens must be non-empty")
    title = field_tokens(record, "title")
    keywords = field_tokens(record, "keywords")
    abstract = field_tokens(record, "abstract")
    authors = field_tokens(record, "authors")
    venue = field_tokens(record, "venue")
    score = 0
    for t in query_tokens:
        score += (
            TITLE_WEIGHT * title.count(t)
            + KEYWORDS_WEIGHT * keywords.count(t)
            + ABSTRACT_WEIGHT * abstract.count(t)
            + AUTHORS_WEIGHT * authors.count(t)
            + VENUE_WEIGHT * venue.count(t)
        )
    return score


def match_multivariate(record: PublicationRecord, constraints: tuple[Constraint, ...]) -> bool:
    """AND of all predicates; year ranges inclusive, text by token presence."""
    if not constraints:
        raise ValueError("constraints must be non-empty")
    for c in constraints:
        if isinstance(c, YearRange):
            if not (c.lo <= record.year <= c.hi):
                return False
        else:
            have = field_tokens(record, c.field)
            if not all(t in have for t in tokenize(c.token)):
                return False
    return True


@dataclass(frozen=True, slots=True)
class Hit:
    record_id: int
    score: int
    partition_id: str
    year: int
    title: str


@dataclass(frozen=True, slots=True)
class ScanStats:
    records_scanned: int
    elapsed_ms: float
    partition_id: str


# --- wire payload shapes (canonical key order, see README protocol docs) ---

def constraint_to_payload(c: Constraint) -> dict:
    if isinstance(c, YearRange):
        return {"field": "year", "lo": c.lo, "hi": c.hi}
    return {"field": c.field, "token": c.token}


def constraint_from_payload(obj: dict) -> Constraint:
    if obj.get("field") == "year":
        return YearRange(lo=obj["lo"], hi=obj["hi"])
    return FieldPredicate(field=obj["field"], token=obj["token"])


def query_to_payload(query: Query) -> dict:
    return {
        "kind": query.kind,
        "text": query.text,
        "constraints": [constraint_to_payload(c) for c in query.constraints],
        "top_k": query.top_k,
    }


def query_from_payload(obj: dict) -> Query:
    try:
        return Query(
            kind=obj["kind"],
            text=obj.get("text", ""),
            constraints=tuple(constraint_from_payload(c) for c in obj.get("constraints", [])),
            top_k=obj["top_k"],
        )
    except (KeyError, TypeError) as exc:
        raise InvalidQueryError(f"bad query payload: {exc}") from exc


def hit_to_payload(hit: Hit) -> dict:
    return {
        "record_id": hit.record_id,
        "score": hit.score,
        "partition_id": hit.partition_id,
        "year": hit.year,
        "title": hit.title,
    }


def hit_from_payload(obj: dict) -> Hit:
    return Hit(
        record_id=obj["record_id"],
        score=obj["score"],
        partition_id=obj["partition_id"],
        year=obj["year"],
        title=obj["title"],
    )


def stats_to_payload(stats: ScanStats) -> dict:
    return {
        "partition_id": stats.partition_id,
        "records_scanned": stats.records_scanned,
        "elapsed_ms": stats.elapsed_ms,
    }


def stats_from_payload(obj: dict) -> ScanStats:
    return ScanStats(
        records_scanned=obj["records_scanned"],
        elapsed_ms=obj["elapsed_ms"],
        partition_id=obj["partition_id"],
    )
