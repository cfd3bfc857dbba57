import pytest

from slc import check_spec, compile_spec, parse_spec, parse_term
from slc.corpus import entry, provide_corpus


def load(name):
    checked = check_spec(parse_spec(entry(name).spec_text()))
    return checked, compile_spec(checked)


@pytest.fixture(scope="session")
def cbv():
    return load("cbv")


@pytest.fixture(scope="session")
def corpus_specs():
    return {e.name: load(e.name) for e in provide_corpus()}


def term(checked, text):
    text = text.strip()
    return parse_term(checked.signature, text if text.endswith(";;") else text + ";;")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
