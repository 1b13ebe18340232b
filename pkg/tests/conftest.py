import numpy as np
import pytest

from patterned_rmt.pattern import preset

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; echoed in the terminal summary."""
    def _report(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def lower():
    return preset("lower-triangular")


@pytest.fixture
def full():
    return preset("full")


@pytest.fixture
def discs():
    return preset("three-discs")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
