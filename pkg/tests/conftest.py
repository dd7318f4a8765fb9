import os
from pathlib import Path

import pytest

os.environ.setdefault("SYMELIM_CHECKS", "1")


ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(ROOT, "corpus")


@pytest.fixture(scope="session")
def corpus_dir():
    return Path(CORPUS)
