import math

import pytest

from gwemission import AtomModel, GwBackground

# one line per acceptance criterion, printed again in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture
def atom_small():
    # omega0/omega = 40 keeps first-principles integrals cheap
    return AtomModel.from_linewidth(40.0, 1e-3)


@pytest.fixture
def gw_unit():
    return GwBackground(1e-6, 1.0)


@pytest.fixture
def two_pi():
    return 2 * math.pi
