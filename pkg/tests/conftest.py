import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

logging.basicConfig(level=logging.WARNING)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """400 records in 4 partitions, shared by integration tests."""
    from fedsearch.corpus import generate_corpus, load_manifest, partition_dataset

    corpus_dir = tmp_path_factory.mktemp("corpus400")
    manifest = generate_corpus(400, 20260810, corpus_dir)
    partition_dataset(manifest, 4)
    return load_manifest(corpus_dir / "manifest.json")
