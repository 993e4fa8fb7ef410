"""
Shared fixtures: desk-sized parameters and grids, and a verbosity reset so
that tests changing -q/-v do not leak into each other.
"""

import numpy as np
import pytest

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.fields import make_grid
from anyonkin_pkg.collision import CollisionKernel, CollisionOperator
from anyonkin_pkg.invariants import desk_params

def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: scenario runs taking more than a few seconds")

@pytest.fixture(autouse=True)
def reset_verbosity():
    saved = pr.option_verbosity
    yield
    pr.option_verbosity = saved

@pytest.fixture
def params():
    return desk_params()

@pytest.fixture
def grid(params):
    return make_grid(params)

@pytest.fixture
def operator(params, grid):
    return CollisionOperator(grid, CollisionKernel.from_params(params),
                             params.alpha, params.j)

@pytest.fixture
def rng():
    return np.random.default_rng(20211)

@pytest.fixture
def random_field(rng):
    """
    Factory: uniform random values in [low, top) on the ball of grid, zero
    off it.
    """
    def make(grid, top=1.0, low=0.0):
        return np.where(grid.mask, rng.uniform(low, top, grid.shape), 0.0)
    return make
