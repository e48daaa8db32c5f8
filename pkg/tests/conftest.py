import math

import pytest

from xlarray import ArrayGeometry, LinkBudget

# Spacing used throughout the numerical studies; half of a 0.1256 m wavelength.
D = 0.0628


@pytest.fixture
def lam_short():
    """Wavelength equal to the spacing, which the quoted reference numbers use."""
    return 0.0628


@pytest.fixture
def budget_short(lam_short):
    return LinkBudget(1e9, lam_short)


@pytest.fixture
def budget():
    return LinkBudget(1e9, 2 * D)


def isotropic(m_y, m_z, wavelength=2 * D, d=D):
    return ArrayGeometry(m_y, m_z, d, wavelength**2 / (4 * math.pi))


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
