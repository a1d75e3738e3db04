"""Two-layer composite problem: per-layer L1 in time, central differences in space.

The interface node is shared. Its row enforces flux continuity
``D1 X_x(l1-) = D2 X_x(l1+)`` in one of three forms:

* ``"one_sided"``: second-order one-sided differences (default);
* ``"first_order"``: first-order one-sided differences;
* ``"balance"``: half-cell balance of both layer equations, in which the
  flux terms cancel. For identical layers this is exactly the interior row of
  the single-layer scheme.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.linalg import solve_banded

from tempfrac.analytic import TwoLayerProblem
from tempfrac.l1 import l1_step_coefficients
from tempfrac.mesh import GradedMesh
from tempfrac.solvers.diffusion import DiffusionRun, SpatialGrid

INTERFACE_ROWS = ("one_sided", "first_order", "balance")


def twolayer_grading(p: TwoLayerProblem) -> float:
    """``min_i 2(2 - alpha_i)/alpha_i``, floored at 1 for classical layers."""
    r = min(2.0 * (2.0 - L.params.alpha) / L.params.alpha for L in (p.layer1, p.layer2))
    return max(r, 1.0)


def _initial_profile(data, x: np.ndarray) -> np.ndarray:
    if callable(data):
        return np.asarray(data(x), dtype=float) * np.ones_like(x)
    return np.full(x.shape, float(data))


def solve_twolayer(
    p: TwoLayerProblem,
    mesh: GradedMesh,
    grid: SpatialGrid,
    interface: str = "one_sided",
    *,
    keep: str = "final",
) -> DiffusionRun:
    """March the coupled scheme over ``mesh`` on the full grid ``x_0..x_M``.

    The interface must be a grid node. Boundary nodes carry ``fL`` and ``fR``
    for ``t > 0``; at ``t = 0`` every node holds the initial data.
    """
    if interface not in INTERFACE_ROWS:
        raise ValueError(f"interface must be one of {INTERFACE_ROWS}, got {interface!r}")
    if keep not in ("final", "all"):
        raise ValueError(f"keep must be 'final' or 'all', got {keep!r}")
    L1, L2 = p.layer1, p.layer2
    if not (math.isclose(grid.x[0], L1.left) and math.isclose(grid.x[-1], L2.right)):
        raise ValueError("grid does not span the composite domain")
    m1f = (p.interface - grid.x[0]) / grid.h
    M1 = int(round(m1f))
    if not math.isclose(m1f, M1, abs_tol=1e-9) or not 2 <= M1 <= grid.M - 2:
        raise ValueError("the interface must fall on a grid node with two nodes on each side")
    M = grid.M
    h2 = grid.h**2
    x = grid.x
    X = np.empty((mesh.N + 1, M + 1))
    X[0, :M1] = _initial_profile(p.X10, x[:M1])
    X[0, M1 + 1 :] = _initial_profile(p.X20, x[M1 + 1 :])
    X[0, M1] = 0.5 * (_initial_profile(p.X10, x[M1 : M1 + 1])[0] + _initial_profile(p.X20, x[M1 : M1 + 1])[0])
    i1 = slice(1, M1)
    i2 = slice(M1 + 1, M)

    # banded storage for solve_banded((2, 2), ...): ab[2 + i - j, j] = A[i, j]
    ab = np.zeros((5, M + 1))
    rhs = np.empty(M + 1)

    def put(i, j, v):
        ab[2 + i - j, j] = v

    put(0, 0, 1.0)
    put(M, M, 1.0)
    start = time.perf_counter()
    for n in range(1, mesh.N + 1):
        c1 = l1_step_coefficients(mesh, L1.params, n)
        c2 = l1_step_coefficients(mesh, L2.params, n)
        hist1 = c1[:n] @ X[:n, : M1 + 1]
        hist2 = c2[:n] @ X[:n, M1:]
        for layer, c, rows, hist, offset in (
            (L1, c1, range(1, M1), hist1, 0),
            (L2, c2, range(M1 + 1, M), hist2, M1),
        ):
            k = layer.D / h2
            idx = np.arange(rows.start, rows.stop)
            ab[2, idx] = c[n] + 2.0 * k - layer.Sb
            ab[1, idx + 1] = -k  # super-diagonal A[i, i+1]
            ab[3, idx - 1] = -k  # sub-diagonal A[i, i-1]
            rhs[idx] = layer.Sa - hist[idx - offset]
        # interface row (clear the pentadiagonal slots first)
        for j in range(M1 - 2, M1 + 3):
            put(M1, j, 0.0)
        D1, D2 = L1.D, L2.D
        if interface == "one_sided":
            put(M1, M1 - 2, D1)
            put(M1, M1 - 1, -4.0 * D1)
            put(M1, M1, 3.0 * D1 + 3.0 * D2)
            put(M1, M1 + 1, -4.0 * D2)
            put(M1, M1 + 2, D2)
            rhs[M1] = 0.0
        elif interface == "first_order":
            put(M1, M1 - 1, -D1)
            put(M1, M1, D1 + D2)
            put(M1, M1 + 1, -D2)
            rhs[M1] = 0.0
        else:
            put(M1, M1 - 1, -2.0 * D1)
            put(M1, M1, h2 * (c1[n] + c2[n] - L1.Sb - L2.Sb) + 2.0 * D1 + 2.0 * D2)
            put(M1, M1 + 1, -2.0 * D2)
            rhs[M1] = h2 * (L1.Sa + L2.Sa - hist1[M1] - hist2[0])
        # Dirichlet rows: the neighbours of the boundary keep their coupling
        ab[1, 1] = 0.0  # A[0, 1]
        ab[3, M - 1] = 0.0  # A[M, M-1]
        rhs[0] = p.fL
        rhs[M] = p.fR
        X[n] = solve_banded((2, 2), ab, rhs, check_finite=False)
    elapsed = time.perf_counter() - start
    if keep == "all":
        times, fields = np.asarray(mesh.nodes), X
    else:
        times, fields = np.array([mesh.nodes[-1]]), X[-1:].copy()
    return DiffusionRun(
        "L1-twolayer", grid, times, fields, elapsed, {"interface": interface, "M1": M1}
    )
