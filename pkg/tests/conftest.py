import matplotlib
matplotlib.use('Agg')

import numpy as np
import pytest

from abers.abe_core import GridSpec, Field, PhysicalParams


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the long reproductions of the numerical experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long reproduction, only run with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid():
    """[-40, 40] with dx = 0.1"""
    return GridSpec.from_dx(-40., 40., 0.1)


@pytest.fixture
def params():
    return PhysicalParams.numerical_section()


@pytest.fixture
def gaussian(grid):
    return Field.from_function(grid, lambda x: np.exp(-0.5 * x ** 2))
