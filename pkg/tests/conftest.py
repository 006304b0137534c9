import pytest

from artifact.hecke import get_newform


@pytest.fixture(scope="session")
def delta():
    return get_newform("1.12.a")


@pytest.fixture(scope="session")
def f11():
    return get_newform("11.2.a")


@pytest.fixture(scope="session")
def f23():
    return get_newform("23.2.a")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
