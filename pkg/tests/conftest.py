from pathlib import Path

import pytest

from apoplan.theory import ActionTheory, parse_theory

REPO = Path(__file__).resolve().parent.parent
TIGER_PATH = REPO / "domains" / "tiger.apo"


@pytest.fixture(scope="session")
def tiger_text() -> str:
    return TIGER_PATH.read_text()


@pytest.fixture(scope="session")
def tiger(tiger_text) -> ActionTheory:
    return parse_theory(tiger_text)
