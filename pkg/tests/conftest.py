import numpy as np
import pytest

from ess.field.grid import Grid
from ess.geometry import Disk, Ellipse


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")


@pytest.fixture(scope="session")
def disk():
    return Disk(1.0)


@pytest.fixture(scope="session")
def ellipse():
    return Ellipse(1.0, 0.75)


@pytest.fixture(scope="session")
def disk_grid(disk):
    return Grid(disk, 128)


@pytest.fixture(scope="session")
def ellipse_grid(ellipse):
    return Grid(ellipse, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
