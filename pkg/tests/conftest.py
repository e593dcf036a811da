import json

import pytest

from schottky_zeta import cli, schottky

CORPUS = ("genus1", "genus2_real", "genus2_complex", "genus3_real")

#: lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def load_corpus(name: str) -> schottky.SchottkyGroup:
    return schottky.build(json.loads(cli.corpus_path(name).read_text()))


@pytest.fixture(scope="session")
def corpus():
    return {name: load_corpus(name) for name in CORPUS}


@pytest.fixture(scope="session")
def g2_real():
    return load_corpus("genus2_real")


@pytest.fixture(scope="session")
def g2_complex():
    return load_corpus("genus2_complex")


@pytest.fixture(scope="session")
def g3_real():
    return load_corpus("genus3_real")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
