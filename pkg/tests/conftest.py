import pytest

from culturedyn import integrate
from culturedyn.model import CultureParams, single_culture
from culturedyn.presets import fig1a, fig1b, fig2

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fig1a_traj():
    return integrate(fig1a())


@pytest.fixture(scope="session")
def fig1b_traj():
    return integrate(fig1b())


@pytest.fixture(scope="session")
def fig2_traj():
    return integrate(fig2())


@pytest.fixture
def linear_scenario():
    # a = b = e = 0: D is frozen and S grows at d * h0 = 10 per unit time
    return single_culture(CultureParams(a=0, b=0, d=2, e=0, s0=1, s1=1, h0=5), 4.0, 1.5, horizon=3.0)


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
