import numpy as np
import pytest

from cavityforce import OccupationModel, WallSchedule


@pytest.fixture
def standard():
    """Hard-wall scenario used throughout: L0 = 1, Ldot0 = 0.02."""
    return WallSchedule.linear(1.0, 0.02)


@pytest.fixture
def ground():
    return OccupationModel.zero_temperature(1)


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line per acceptance criterion and assert on it."""
    def _record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
