from pathlib import Path

import pytest

from dbstudio.dbd import parse_dbd

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_bytes().decode("latin-1")


@pytest.fixture(scope="session")
def example_text() -> str:
    return read_fixture("example.db")


@pytest.fixture(scope="session")
def dbd_text() -> str:
    return read_fixture("test.dbd")


@pytest.fixture(scope="session")
def registry(dbd_text):
    reg, diags = parse_dbd(dbd_text)
    assert not diags
    return reg


@pytest.fixture(scope="session")
def corpus_files():
    files = sorted(CORPUS.glob("*.db"))
    assert len(files) >= 20
    return files
