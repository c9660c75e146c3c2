import numpy as np
import pytest

from choquard.grid import SpatialGrid
from choquard.harness import Lcg64, random_smooth_field
from choquard.model import NEAR_MASS_CRITICAL, REFERENCE
from choquard.nonlinearity import Choquard


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance runs")


@pytest.fixture(params=[REFERENCE, NEAR_MASS_CRITICAL], ids=["reference", "near-mass-critical"])
def params(request):
    return request.param


@pytest.fixture
def small_grid():
    return SpatialGrid(3, 12.0, 24)


@pytest.fixture
def ctx(params, small_grid):
    return Choquard(params, small_grid, boundary="periodic")


@pytest.fixture
def field(small_grid):
    return 0.35 * random_smooth_field(small_grid, Lcg64(7), width=1.5)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
