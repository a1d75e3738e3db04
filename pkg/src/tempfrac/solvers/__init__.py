"""Time-stepping solvers built on the discrete tempered operators."""

from tempfrac.solvers.benchmark import SolverRun, solve_benchmark, solve_benchmark_forced
from tempfrac.solvers.bloch import BlochRun, solve_bloch
from tempfrac.solvers.diffusion import SpatialGrid, build_spatial_grid, solve_diffusion
from tempfrac.solvers.twolayer import solve_twolayer

__all__ = [
    "BlochRun",
    "SolverRun",
    "SpatialGrid",
    "build_spatial_grid",
    "solve_benchmark",
    "solve_benchmark_forced",
    "solve_bloch",
    "solve_diffusion",
    "solve_twolayer",
]
