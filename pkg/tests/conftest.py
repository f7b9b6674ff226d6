import numpy as np
import pytest

from morphsolve.grid import build_grid
from morphsolve.model import FIGURE1, Params
from morphsolve.steady import solve_steady, solve_steady_split

# -u'' + u = 2 delta on (-1, 1) with Neumann walls: u = cosh(1 - |x|) / sinh(1)
GREEN = Params(d=1.0, b=(1, 1, 1, 1, 1), c=(0, 0, 0, 0, 0), p1=2.0, p3=0.0)


def green_exact(x):
    return np.cosh(1 - np.abs(x)) / np.sinh(1)


@pytest.fixture(scope="session")
def fig1_split_512():
    return solve_steady_split(FIGURE1, build_grid(512))


@pytest.fixture(scope="session")
def fig1_split_1024():
    return solve_steady_split(FIGURE1, build_grid(1024))


@pytest.fixture(scope="session")
def fig1_delta_512():
    return solve_steady(FIGURE1, build_grid(512))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
