import os

import pytest
from hypothesis import HealthCheck, settings

from equispec.shift_ode import generate, preset
from equispec.spectral import classify_states, solve_potential

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# level count used for the two-class statistics of the generated presets
PRESET_LEVELS = 100


def _solved(name):
    gen = generate(preset(name))
    sol = solve_potential(gen, k=PRESET_LEVELS)
    return gen, sol, classify_states(sol, gen.U)


@pytest.fixture(scope="session")
def type1_solved():
    gen = generate(preset("type1"))
    return gen, solve_potential(gen, k=40)


@pytest.fixture(scope="session")
def type2_solved():
    return _solved("type2")


@pytest.fixture(scope="session")
def type3_solved():
    return _solved("type3")


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """``criterion(id, name, ok, detail)`` records one acceptance line and asserts it."""

    def check(cid, name, ok, detail):
        _ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] {cid:<3} {name}: {detail}")
        assert ok, f"criterion {cid} ({name}) not met: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)
