"""Tempered time-fractional Caputo derivatives: discretizations, fast history,
reference solutions, solvers, relaxometry fitting and convergence studies."""

from __future__ import annotations

from tempfrac.mesh import GradedMesh, TemperedParams, build_graded_mesh, optimal_grading

__version__ = "0.1.0"

__all__ = [
    "GradedMesh",
    "TemperedParams",
    "__version__",
    "build_graded_mesh",
    "optimal_grading",
]
