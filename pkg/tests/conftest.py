import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hapsar.config import shipped_scenario
from hapsar.platform import MissionGeometry

settings.register_profile("hapsar", max_examples=60, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hapsar")


@pytest.fixture(scope="session")
def desk():
    return shipped_scenario()


@pytest.fixture(scope="session")
def desk_m1(desk):
    return replace(desk, mission=replace(desk.mission, M=1))


@pytest.fixture(scope="session")
def desk_run(desk):
    """Full joint search on the shipped scenario, shared by every test that needs it."""
    from hapsar.sca import optimize
    return optimize(desk)


@pytest.fixture
def geo():
    return MissionGeometry(3, 8, 10.0, math.radians(25), math.radians(15), math.radians(10), 9.8)


@pytest.fixture
def rng(desk):
    return np.random.default_rng(desk.solver.seed)


ACCEPTANCE = []


def record(criterion, ok, detail):
    """Acceptance verdict line; printed together at the end of the session."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
