import numpy as np
import pytest

from fiscalipw.config import fixture_path
from fiscalipw.data import assemble_panel, load_csv

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fixture_table():
    return load_csv(fixture_path())


@pytest.fixture(scope="session")
def fixture_panel(fixture_table):
    return assemble_panel(fixture_table)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
