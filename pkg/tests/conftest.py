import math

import numpy as np
import pytest

from pseudoroll.hyperquadric import Hyperquadric
from pseudoroll.kinematics import Control, integrate_kinematics
from pseudoroll.linalg import Signature

R2 = math.sqrt(2.0)


def boost(t):
    """Closed-form boost in the (0, 2) plane of R^3_1."""
    c, s = math.cosh(t), math.sinh(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [s, 0.0, c]])


@pytest.fixture(scope="session")
def sig3():
    return Signature(3, 1)


@pytest.fixture(scope="session")
def hq3(sig3):
    return Hyperquadric(sig3)


@pytest.fixture(scope="session")
def x0():
    return np.array([0.0, 0.0, 1.0])


@pytest.fixture(scope="session")
def grid():
    return np.linspace(0.0, 1.0, 1001)


@pytest.fixture(scope="session")
def rollings(hq3, x0, grid):
    """Benchmark rollings for a timelike, a spacelike and a null constant control."""
    controls = {"timelike": (1.0, 0.0, 0.0), "spacelike": (0.0, 1.0, 0.0), "null": (1.0, 1.0, 0.0)}
    return {name: integrate_kinematics(hq3, x0, Control.constant(u), grid) for name, u in controls.items()}


@pytest.fixture(scope="session")
def benchmark(rollings):
    return rollings["timelike"]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
