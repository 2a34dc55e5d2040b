import pytest

from hyperscatter.bgrid import GridParams
from hyperscatter.config import load_config
from hyperscatter.scattering import Scattering
from hyperscatter.schottky import SchottkyData

# acceptance lines collected by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def thin():
    return SchottkyData.symmetric(0.1)


@pytest.fixture(scope="session")
def thin_config():
    return load_config("thin-schottky")


@pytest.fixture(scope="session")
def small_sc(thin):
    """Coarse scattering discretization, enough for structural tests."""
    return Scattering(thin, GridParams(Q=64), N=8)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
