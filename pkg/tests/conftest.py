import math

import pytest

from superscatter.params import MassPair, ProbeBeam
from superscatter.target import TargetSuperposition

P_IN = 2.0 * math.pi  # incident momentum with the wavelength as length unit

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def slit_setup():
    """Single-slit fixture: M/m = 0.5, 45 degree incidence, d = 7, w = 0.2, sharp beam."""
    return MassPair(1.0, 0.5), TargetSuperposition(7.0, 0.2), ProbeBeam(P_IN, math.radians(45.0))


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title} -- {detail}")
        print(ACCEPTANCE_LINES[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
