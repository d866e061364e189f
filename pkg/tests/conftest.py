import numpy as np
import pytest
from hypothesis import settings

from sympat.scenario import load_shipped

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# acceptance criteria record (label, passed, detail) here; printed at session end
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")


@pytest.fixture(scope="session")
def fn_scenario():
    return load_shipped("fn_antisync")


@pytest.fixture(scope="session")
def pitchfork_scenario():
    return load_shipped("pitchfork_design")


@pytest.fixture(scope="session")
def harmonic_scenario():
    return load_shipped("harmonic_tripartite")


@pytest.fixture(scope="session")
def discrete_scenario():
    return load_shipped("discrete_signed_consensus")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
