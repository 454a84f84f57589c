import pytest

from stpl import corpus
from stpl.datastream import read_csv
from stpl.formula import parse_file


@pytest.fixture(scope="session")
def sample_stream():
    return read_csv(corpus.path("sample_stream.csv"))


@pytest.fixture(scope="session")
def manifest():
    return corpus.manifest()


def corpus_formula(name):
    return parse_file(corpus.path(name))


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props and rep.when == "call":
                rows.append((props["criterion"], outcome.upper(), props["detail"]))
    if rows:
        terminalreporter.section("acceptance criteria")
        for label, outcome, detail in sorted(rows):
            terminalreporter.write_line(f"{outcome:7} {label}: {detail}")
