import numpy as np
import pytest

from polarwalk.landau import make_landau_spec
from polarwalk.spinor import SpinorField, make_grid, random_antiperiodic_field


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grid():
    return make_grid(16, 1.0, 12)


@pytest.fixture
def fig1_spec():
    return make_landau_spec(1, 5, 0.1, 1.0)


def random_field(grid, rng, basis="polar"):
    data = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return SpinorField(grid, data, basis)


def antiperiodic(grid, rng, **kw):
    return random_antiperiodic_field(grid, rng, **kw)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
