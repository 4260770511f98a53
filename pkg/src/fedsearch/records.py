"""Publication record model and the newline-delimited JSON line format.

One record per line, UTF-8, LF endings. The serialized key order is fixed
so that serialize(parse(line)) == line holds for every line the corpus
generator emits, which keeps content digests meaningful.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

RECORD_FIELDS = ("id", "title", "authors", "abstract", "keywords", "venue", "year")

YEAR_MIN = 1800
YEAR_MAX = 2100


@dataclass(frozen=True, slots=True)
class PublicationRecord:
    id: int
    title: str
    authors: tuple[str, ...]
    abstract: str
    keywords: tuple[str, ...]
    venue: str
    year: int


def validate_record(rec: PublicationRecord) -> None:
    if rec.id < 0 or rec.id > 0xFFFFFFFFFFFFFFFF:
        raise ValueError(f"id {rec.id} outside unsigned 64-bit range")
    if not rec.title:
        raise ValueError("title must be non-empty")
    if not (YEAR_MIN <= rec.year <= YEAR_MAX):
        raise ValueError(f"year {rec.year} outside [{YEAR_MIN}, {YEAR_MAX}]")


def serialize_record(rec: PublicationRecord) -> str:
    """Render one record as its canonical JSON line (no trailing newline)."""
    obj = {
        "id": rec.id,
        "title": rec.title,
        "authors": list(rec.authors),
        "abstract": rec.abstract,
        "keywords": list(rec.keywords),
        "venue": rec.venue,
        "year": rec.year,
    }
    return json.dumps(obj, ensure_ascii=True, separators=(",", ":"))


def parse_record(line: str) -> PublicationRecord:
    """Parse one line; raises ValueError on any schema violation."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValueError("record line is not a JSON object")
    if set(obj) != set(RECORD_FIELDS):
        missing = sorted(set(RECORD_FIELDS) - set(obj))
        extra = sorted(set(obj) - set(RECORD_FIELDS))
        parts = []
        if missing:
            parts.append(f"missing fields {missing}")
        if extra:
            parts.append(f"unexpected fields {extra}")
        raise ValueError("; ".join(parts))
    if not isinstance(obj["id"], int) or isinstance(obj["id"], bool):
        raise ValueError("id must be an integer")
    if not isinstance(obj["year"], int) or isinstance(obj["year"], bool):
        raise ValueError("year must be an integer")
    for key in ("title", "abstract", "venue"):
        if not isinstance(obj[key], str):
            raise ValueError(f"{key} must be a string")
    for key in ("authors", "keywords"):
        val = obj[key]
        if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
            raise ValueError(f"{key} must be a list of strings")
    rec = PublicationRecord(
        id=obj["id"],
        title=obj["title"],
        authors=tuple(obj["authors"]),
        abstract=obj["abstract"],
        keywords=tuple(obj["keywords"]),
        venue=obj["venue"],
        year=obj["year"],
    )
    validate_record(rec)
    return rec


def content_digest(data: bytes) -> str:
    """64-bit digest of raw bytes, as 16 lowercase hex chars."""
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def file_digest(path: Path) -> str:
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as fh:
        while chunk := fh.read(1 << 20):
            h.update(chunk)
    return h.hexdigest()
