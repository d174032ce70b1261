import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from satcrypt.keys import Clause, PrivateKey, PublicKey, keygen  # noqa: E402
from satcrypt.prng import DeterministicRng  # noqa: E402

# acceptance lines collected here are echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


TOY_PRIV = (1, 1, 0, 0, 1, 0, 0)
TOY_CLAUSES = ((-1, -2, -3), (-1, 4, 5), (1, 6, 7))


@pytest.fixture(scope="session")
def toy_pair():
    pub = PublicKey(7, 3, tuple(Clause.from_literals(c) for c in TOY_CLAUSES))
    return PrivateKey(TOY_PRIV), pub


@pytest.fixture(scope="session")
def key64():
    return keygen(64, 320, 3, DeterministicRng.from_label("tests/key64"))


@pytest.fixture(scope="session")
def key32():
    return keygen(32, 160, 3, DeterministicRng.from_label("tests/key32"))


@pytest.fixture(scope="session")
def small_key():
    # few clauses keep every ciphertext on a small variable set (homomorphic tests)
    return keygen(32, 10, 3, DeterministicRng.from_label("tests/small"))


@pytest.fixture
def rng(request):
    return DeterministicRng.from_label("tests/" + request.node.name)
