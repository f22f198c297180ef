import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def golden_corpus():
    return FIXTURES / "golden_corpus"


@pytest.fixture
def forge_source(golden_corpus):
    from aucad.transport import ForgeSource

    return ForgeSource(fixtures_dir=golden_corpus / "forge")


@pytest.fixture
def tracker_source(golden_corpus):
    from aucad.transport import TrackerSource

    return TrackerSource(fixtures_dir=golden_corpus / "tracker")
