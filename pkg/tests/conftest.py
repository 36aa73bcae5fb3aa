import pytest
from hypothesis import settings

from indexgame.market import ImpactParams, ScenarioParams

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def core():
    return ImpactParams()


@pytest.fixture
def low_gamma():
    return ImpactParams(gamma=1e-8)


@pytest.fixture
def scen_5m():
    return ScenarioParams(d_shares=5e6)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
