#!/usr/bin/env python3
"""Rewrite tests/golden/wire_messages.jsonl from the fixture envelopes.

Run only when the protocol intentionally changes; the golden test exists
to catch accidental byte drift.
"""
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from wire_fixtures import catalog_envelopes  # noqa: E402

from fedsearch.wire import encode  # noqa: E402


def main():
    out = ROOT / "tests" / "golden" / "wire_messages.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    data = b"".join(encode(env) for env in catalog_envelopes())
    out.write_bytes(data)
    print(f"wrote {out} ({len(data)} bytes, {len(catalog_envelopes())} messages)")


if __name__ == "__main__":
    main()
