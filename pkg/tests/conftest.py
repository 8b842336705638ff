import numpy as np
import pytest

from roughbessel.fbm import FbmPath, FgnMethod, grid

_ACCEPTANCE_LINES = []


def record_criterion(name, passed, detail):
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def zero_driver(n, horizon=1.0, hurst=0.3):
    """An FbmPath that is identically zero (deterministic ODE case)."""
    values = np.zeros(n + 1)
    return FbmPath(grid(n, horizon), values, float(horizon), hurst, 0, FgnMethod.CIRCULANT)


@pytest.fixture
def acceptance_record():
    return record_criterion
