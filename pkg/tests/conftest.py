import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from critlab.geometry import SpaceForm  # noqa: E402
from critlab.solutions import BallSpec, SchwarzschildSpec, construct_ball, construct_schwarzschild  # noqa: E402

ACCEPTANCE_LINES = []


def ball_radius(space):
    return math.pi / 3 if SpaceForm(space) is SpaceForm.SPHERICAL else 1.0


@pytest.fixture(scope="session")
def schwarzschild():
    return construct_schwarzschild(SchwarzschildSpec(3, 1.0, 6.0))


@pytest.fixture(scope="session")
def ads_schwarzschild():
    return construct_schwarzschild(SchwarzschildSpec(3, 1.0, 6.0, ads=True))


@pytest.fixture(scope="session")
def euclidean3():
    return construct_ball(BallSpec(SpaceForm.EUCLIDEAN, 3, 1.0))


@pytest.fixture(scope="session")
def spherical3():
    return construct_ball(BallSpec(SpaceForm.SPHERICAL, 3, math.pi / 3))


@pytest.fixture(scope="session")
def hyperbolic3():
    return construct_ball(BallSpec(SpaceForm.HYPERBOLIC, 3, 1.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
