import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

import corpus


@pytest.fixture(scope="session")
def prelude():
    return corpus.PRELUDE


@pytest.fixture(scope="session")
def env():
    return corpus.ENV


@pytest.fixture(scope="session")
def nat_corpus():
    return corpus.nat_corpus()
