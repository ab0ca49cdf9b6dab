import numpy as np
import pytest

from millibots.planning import build_grid, maze_obstacles, plan


@pytest.fixture(scope="session")
def maze_grid():
    return build_grid(maze_obstacles())


@pytest.fixture(scope="session")
def maze_plan(maze_grid):
    start = maze_grid.cell_of((-13e-3, -13e-3))
    goal = maze_grid.cell_of((-13e-3, 13e-3))
    return plan(maze_grid, start, goal)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
