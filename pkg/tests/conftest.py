from pathlib import Path

import pytest

from latticeshift import formats

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus(name):
    return CORPUS / name


@pytest.fixture(scope="session")
def ledrappier():
    return formats.load_sft(corpus("ledrappier.sft"))


@pytest.fixture(scope="session")
def golden():
    return formats.load_sft(corpus("golden_mean.sft"))


@pytest.fixture(scope="session")
def ledrappier_pres(ledrappier):
    return formats.load_presentation(corpus("ledrappier.pres"), ledrappier)


@pytest.fixture(scope="session")
def golden_pres(golden):
    return formats.load_presentation(corpus("golden_mean.pres"), golden)


@pytest.fixture(scope="session")
def golden_diag_pres(golden):
    return formats.load_presentation(corpus("golden_mean_pipeline.pres"), golden)


@pytest.fixture(scope="session")
def halfspace_manual():
    return formats.load_manual(corpus("halfspace_d1.man"))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
