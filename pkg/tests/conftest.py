import os

import pytest

from cicr.driver import run_file

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "corpus")


def corpus(name: str) -> str:
    return os.path.join(CORPUS, name)


def load(name: str):
    """Run a corpus file into a fresh environment; fail fast if it does not
    check."""
    res = run_file(corpus(name))
    assert res.status == 0, [str(d) for d in res.diagnostics]
    return res


@pytest.fixture(scope="module")
def prelude_env():
    return load("prelude.cicr").env


@pytest.fixture(scope="module")
def church_env():
    return load("church.cicr").env


@pytest.fixture(scope="module")
def tree_env():
    return load("tree.cicr").env


@pytest.fixture(scope="module")
def large_env():
    return load("large_elim.cicr").env
