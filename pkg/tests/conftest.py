import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import synth  # noqa: E402
from hybridlemma.corpus import read_conllu  # noqa: E402
from hybridlemma.pipeline import train  # noqa: E402
from hybridlemma.selector import SelectorConfig  # noqa: E402

DATA = Path(__file__).parent / "data"

# criterion lines collected by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def toy_path():
    return DATA / "toy.conllu"


@pytest.fixture(scope="session")
def toy_corpus(toy_path):
    return read_conllu(str(toy_path))


@pytest.fixture(scope="session")
def toy_model(toy_corpus):
    return train(toy_corpus, SelectorConfig(epochs=5, seed=7))


@pytest.fixture(scope="session")
def synth_train():
    return synth.generate(150, seed=11)


@pytest.fixture(scope="session")
def synth_model(synth_train):
    return train(synth_train, SelectorConfig(epochs=5, seed=3))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
