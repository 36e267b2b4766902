import numpy as np
import pytest

from ferrohaloscope.model import TWO_PI, AxionDrive, HybridParams

# acceptance summary lines, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def hs():
    """Reference strongly coupled system at 4.7 GHz, at degeneracy."""
    return HybridParams.from_hz(4.7e9, 4.7e9, 1.1e6, 3.5e6, 26.5e6)


@pytest.fixture
def drive(hs):
    return AxionDrive(TWO_PI * 1e-7, TWO_PI * 1e24, hs.omega_c)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
