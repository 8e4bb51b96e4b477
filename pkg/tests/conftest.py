import sys
from pathlib import Path

import pytest

from kpqa import CorpusSpec, generate_corpus

FAKE_READER = Path(__file__).parent / "fake_external_reader.py"


def fake_reader_cmd(*args: str) -> list[str]:
    """argv for spawning the scriptable external reader."""
    return [sys.executable, str(FAKE_READER), *args]


@pytest.fixture(scope="session")
def tiny_corpus():
    """Small deterministic corpus shared across tests."""
    return generate_corpus(
        CorpusSpec(n_train_docs=3, n_test_docs=4, catalog_size=8, avg_kps_per_doc=3, seed=11)
    )
