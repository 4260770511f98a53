#!/usr/bin/env python3
"""Write frontend/tests/golden_queries.json from the CLI's query builder.

Each case pairs a UI form state with the equivalent CLI invocation; the
recorded body is what `fedsearch search --json` would send for it (the
exact JSON POSTed to the gateway). The frontend test asserts its own
builder produces byte-identical bodies.
"""
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

from fedsearch.cli import build_query  # noqa: E402
from fedsearch.query import query_to_payload  # noqa: E402
from fedsearch.wire import dumps_canonical  # noqa: E402

FORM_DEFAULTS = {
    "mode": "keyword",
    "keyword": "",
    "predicates": [],
    "yearFrom": "",
    "yearTo": "",
    "topK": "10",
    "targetBroker": "http://127.0.0.1:8001",
}


def form(**over):
    merged = dict(FORM_DEFAULTS)
    merged.update(over)
    return merged


CASES = [
    {
        "name": "single keyword",
        "form": form(keyword="grid"),
        "cli": {"keyword": "grid", "where": [], "year": None, "top_k": 10},
    },
    {
        "name": "multi keyword with top-k",
        "form": form(keyword="grid based search", topK="5"),
        "cli": {"keyword": "grid based search", "where": [], "year": None, "top_k": 5},
    },
    {
        "name": "keyword with punctuation",
        "form": form(keyword="C++ 2010!"),
        "cli": {"keyword": "C++ 2010!", "where": [], "year": None, "top_k": 10},
    },
    {
        "name": "keyword preserves raw spacing",
        "form": form(keyword="  spaced   tokens  ", topK="7"),
        "cli": {"keyword": "  spaced   tokens  ", "where": [], "year": None, "top_k": 7},
    },
    {
        "name": "venue predicate",
        "form": form(mode="multivariate", predicates=[{"field": "venue", "value": "sigir"}]),
        "cli": {"keyword": None, "where": ["venue=sigir"], "year": None, "top_k": 10},
    },
    {
        "name": "year range only",
        "form": form(mode="multivariate", yearFrom="2010", yearTo="2012"),
        "cli": {"keyword": None, "where": [], "year": "2010..2012", "top_k": 10},
    },
    {
        "name": "venue and year",
        "form": form(
            mode="multivariate",
            predicates=[{"field": "venue", "value": "sigir"}],
            yearFrom="2010",
            yearTo="2012",
            topK="3",
        ),
        "cli": {"keyword": None, "where": ["venue=sigir"], "year": "2010..2012", "top_k": 3},
    },
    {
        "name": "two field predicates",
        "form": form(
            mode="multivariate",
            predicates=[
                {"field": "title", "value": "grid"},
                {"field": "keywords", "value": "data"},
            ],
            topK="20",
        ),
        "cli": {"keyword": None, "where": ["title=grid", "keywords=data"], "year": None, "top_k": 20},
    },
    {
        "name": "single-year shorthand",
        "form": form(mode="multivariate", yearFrom="2011", yearTo="2011"),
        "cli": {"keyword": None, "where": [], "year": "2011", "top_k": 10},
    },
    {
        "name": "authors plus year",
        "form": form(
            mode="multivariate",
            predicates=[{"field": "authors", "value": "byron"}],
            yearFrom="1999",
            yearTo="2004",
            topK="15",
        ),
        "cli": {"keyword": None, "where": ["authors=byron"], "year": "1999..2004", "top_k": 15},
    },
]


def main():
    out = []
    for case in CASES:
        cli = case["cli"]
        query = build_query(cli["keyword"], cli["where"], cli["year"], cli["top_k"])
        body = dumps_canonical(query_to_payload(query))
        out.append({"name": case["name"], "form": case["form"], "body": body})
    dest = ROOT / "frontend" / "tests" / "golden_queries.json"
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {dest} ({len(out)} cases)")


if __name__ == "__main__":
    sys.exit(main() or 0)
