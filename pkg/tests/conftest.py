import warnings
from pathlib import Path

import numpy as np
import pytest

from pucp.config import load_calibration
from pucp.grid import RealField, make_disk_grid
from pucp.manufactured import manufactured_instance
from pucp.singular import make_plan
from pucp.solver import PLaplaceProblem, solve_dirichlet

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
RADII = tuple(2.0 ** -j for j in range(1, 8))


@pytest.fixture(autouse=True)
def _quiet_numpy():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


@pytest.fixture(scope="session")
def grid256():
    return make_disk_grid(256, 8.0)


@pytest.fixture(scope="session")
def grid512():
    return make_disk_grid(512, 8.0)


@pytest.fixture(scope="session")
def plan256(grid256):
    return make_plan(grid256)


@pytest.fixture(scope="session")
def plan512(grid512):
    return make_plan(grid512)


@pytest.fixture(scope="session")
def calibration():
    return load_calibration("calibration.yaml", CONFIGS)


def trig_weight_problem(grid, p):
    X, Y = grid.x, grid.y
    A = RealField(grid, 1 + 0.3 * np.sin(0.4 * X) * np.cos(0.3 * Y))
    data = X + 0.05 * (X ** 2 - Y ** 2) + 0.02 * X * Y
    return PLaplaceProblem("weighted", p, grid, data, weight=A)


class _Solved:
    """Lazily solved battery shared by the whole session."""

    def __init__(self, grid):
        self.grid = grid
        self._cache = {}

    def drifted(self, p):
        key = ("drifted", p)
        if key not in self._cache:
            inst = manufactured_instance("drifted", p, self.grid)
            v, rep = solve_dirichlet(inst.problem)
            self._cache[key] = (inst, v, rep)
        return self._cache[key]

    def weighted(self, p):
        key = ("weighted", p)
        if key not in self._cache:
            prob = trig_weight_problem(self.grid, p)
            v, rep = solve_dirichlet(prob)
            self._cache[key] = (prob, v, rep)
        return self._cache[key]


@pytest.fixture(scope="session")
def solved(grid256):
    return _Solved(grid256)


@pytest.fixture(scope="session")
def solved512(grid512):
    return _Solved(grid512)


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
