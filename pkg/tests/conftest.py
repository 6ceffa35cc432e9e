import numpy as np
import pytest

from inash.environment import Region, RobotSpec, Scenario, Workspace


@pytest.fixture
def empty_box():
    return Workspace.from_corners((0, 0), (10, 10))


@pytest.fixture
def wide_box():
    return Workspace.from_corners((-20, -20), (20, 20))


def make_scenario(bounds, robots, obstacles=(), seed=0):
    return Scenario(
        workspace=Workspace.from_corners(bounds[0], bounds[1], obstacles),
        robots=tuple(robots),
        seed=seed,
    )


@pytest.fixture
def head_on_scenario():
    """Two robots swapping ends of an open 10x10 box."""
    return make_scenario(
        ((0, 0), (10, 10)),
        [
            RobotSpec(1, 0.5, (1, 5), Region.circle(9, 5, 0.8)),
            RobotSpec(2, 0.5, (9, 5), Region.circle(1, 5, 0.8)),
        ],
        seed=7,
    )


@pytest.fixture
def crossing_scenario():
    """Two robots crossing perpendicularly through the center."""
    return make_scenario(
        ((0, 0), (10, 10)),
        [
            RobotSpec(1, 0.5, (1, 5), Region.circle(9, 5, 0.8)),
            RobotSpec(2, 0.5, (5, 1), Region.circle(5, 9, 0.8)),
        ],
        seed=3,
    )
