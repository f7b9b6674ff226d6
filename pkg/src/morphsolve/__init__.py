"""Solver for the one-dimensional morphogen transport model with glypicans."""

from .elliptic import BlockSystem, assemble
from .elliptic import solve as solve_block
from .evolve import State, Trajectory, check_estimates, imex_step, simulate
from .grid import Grid, build_grid, discrete_delta, laplacian_apply, quadrature
from .model import (
    FIGURE1,
    DimensionalParameters,
    Params,
    h_eval,
    local_derivatives,
    nondimensionalize,
    reaction_rhs,
    steady_algebra,
)
from .steady import (
    SteadyOptions,
    SteadySolution,
    check_evenness,
    check_local_derivatives,
    picard_step,
    solve,
    solve_steady,
    solve_steady_split,
)

__version__ = "0.1.0"
