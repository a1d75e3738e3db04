"""Two-layer composite medium: finite differences against the semi-analytic solution."""

from __future__ import annotations

import numpy as np

from tempfrac.analytic import LayerSpec, TwoLayerProblem, twolayer_semianalytic
from tempfrac.mesh import TemperedParams, build_graded_mesh
from tempfrac.solvers import build_spatial_grid, solve_twolayer
from tempfrac.solvers.twolayer import twolayer_grading


def main() -> None:
    l1 = LayerSpec(0.0, 0.5, TemperedParams(0.9, 0.1), 0.25, 0.1, -0.1)
    l2 = LayerSpec(0.5, 1.0, TemperedParams(0.8, 0.5), 0.5, 0.1, -0.1)
    p = TwoLayerProblem(l1, l2, 1.0, 1.0, 0.0, 0.0)
    grid = build_spatial_grid(0.0, 1.0, 100)
    probe = np.arange(0, 101, 10)
    print("x      " + "  ".join(f"{x:6.2f}" for x in grid.x[probe]))
    for t in (0.01, 0.1, 1.0):
        run = solve_twolayer(p, build_graded_mesh(t, 800, twolayer_grading(p)), grid)
        ref = twolayer_semianalytic(p, grid.x, t)
        print(f"t={t:<5}" + "  ".join(f"{v:6.4f}" for v in run.final[probe]))
        print(f"{'':6} max |FD - semi-analytic| = {np.max(np.abs(run.final - ref)):.2e}")


if __name__ == "__main__":
    main()
