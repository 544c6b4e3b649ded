import os
from importlib import resources

import pytest

from semdiff.corpus import Kind, PublicationRecord


@pytest.fixture(scope="session")
def sample_dir():
    return str(resources.files("semdiff") / "data" / "sample")


@pytest.fixture
def rec():
    def make(rid, authors, year, title="", layer="", kind=Kind.JOURNAL):
        return PublicationRecord(rid, title, tuple(authors), year, "", kind, layer)

    return make


def golden_dir():
    return os.path.join(os.path.dirname(__file__), "golden", "sample")
