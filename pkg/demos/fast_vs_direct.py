"""Direct and sum-of-exponentials L1 on the tempered diffusion problem.

Shows the error of both variants and their wall time as ``N`` grows.
"""

from __future__ import annotations

import math

import numpy as np

from tempfrac.analytic import DiffusionProblem, diffusion_exact
from tempfrac.mesh import TemperedParams, build_graded_mesh, optimal_grading
from tempfrac.solvers import build_spatial_grid, solve_diffusion


def main() -> None:
    params = TemperedParams(0.8, 0.5)
    p = DiffusionProblem(params, 1.0)
    grid = build_spatial_grid(0.0, math.pi, 256)
    exact = diffusion_exact(p, grid.x, 1.0)
    print(f"{'N':>6} {'direct err':>11} {'fast err':>11} {'direct s':>9} {'fast s':>8} {'Nexp':>5}")
    for N in (200, 400, 800, 1600, 3200):
        mesh = build_graded_mesh(1.0, N, optimal_grading(params.alpha))
        d = solve_diffusion(p, mesh, grid)
        f = solve_diffusion(p, mesh, grid, fast=True, soe_eps=1e-9)
        ed = np.max(np.abs(d.final - exact))
        ef = np.max(np.abs(f.final - exact))
        print(f"{N:6d} {ed:11.4E} {ef:11.4E} {d.elapsed:9.3f} {f.elapsed:8.3f} {f.info['n_exp']:5d}")


if __name__ == "__main__":
    main()
