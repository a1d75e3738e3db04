"""Tempered diffusion ``D^(alpha,rho) u = D u_xx + f`` with zero Dirichlet data.

Central differences in space, direct or fast L1 in time; each step solves one
tridiagonal system by a Thomas sweep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from tempfrac.analytic import DiffusionProblem
from tempfrac.l1 import l1_step_coefficients
from tempfrac.mesh import GradedMesh
from tempfrac.soe import FastHistory, build_soe


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform nodes ``x_0..x_M`` with spacing ``h``."""

    M: int
    h: float
    x: np.ndarray = field(repr=False)

    @property
    def interior(self) -> np.ndarray:
        return self.x[1:-1]


def build_spatial_grid(left: float, right: float, M: int) -> SpatialGrid:
    if int(M) != M or M < 2:
        raise ValueError(f"M must be an integer >= 2, got {M}")
    if not right > left:
        raise ValueError(f"empty interval [{left}, {right}]")
    x = np.linspace(left, right, int(M) + 1)
    x.setflags(write=False)
    return SpatialGrid(int(M), (right - left) / M, x)


@dataclass
class DiffusionRun:
    """Solution samples; ``fields[k]`` is the full grid profile at ``times[k]``.

    ``max_error`` is filled when an exact solution was supplied: the largest
    nodal deviation over all time levels (or over the stored ones).
    """

    scheme: str
    grid: SpatialGrid
    times: np.ndarray = field(repr=False)
    fields: np.ndarray = field(repr=False)
    elapsed: float = 0.0
    info: dict = field(default_factory=dict)
    max_error: float | None = None

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]


@njit(cache=True)
def _solve_shifted_laplacian(coef, diag, rhs):
    # Thomas sweep for (diag + 2 coef) u_j - coef (u_{j-1} + u_{j+1}) = rhs_j;
    # strictly diagonally dominant, so no pivoting is needed
    size = rhs.size
    c = np.empty(size)
    u = np.empty(size)
    b = diag + 2.0 * coef
    c[0] = -coef / b
    u[0] = rhs[0] / b
    for j in range(1, size):
        m = b + coef * c[j - 1]
        c[j] = -coef / m
        u[j] = (rhs[j] + coef * u[j - 1]) / m
    for j in range(size - 2, -1, -1):
        u[j] -= c[j] * u[j + 1]
    return u


def solve_diffusion(
    p: DiffusionProblem,
    mesh: GradedMesh,
    grid: SpatialGrid,
    fast: bool = False,
    soe_eps: float = 1e-9,
    *,
    exact=None,
    keep: str = "final",
) -> DiffusionRun:
    """March the fully discrete scheme over ``mesh``.

    ``exact(x, t)`` enables error tracking at every time level. ``keep``
    selects stored profiles: ``"final"`` or ``"all"``.
    """
    if keep not in ("final", "all"):
        raise ValueError(f"keep must be 'final' or 'all', got {keep!r}")
    if not np.isclose(grid.x[-1] - grid.x[0], p.l):
        raise ValueError("grid does not span the problem domain")
    x_in = grid.interior
    u0 = np.asarray(p.psi(x_in), dtype=float).copy()
    coef = p.D / grid.h**2
    N = mesh.N
    t = mesh.nodes

    def forcing(n):
        return 0.0 if p.f is None else np.asarray(p.f(x_in, t[n]), dtype=float)

    max_err = 0.0
    checking = 0.0  # time spent on error tracking, excluded from ``elapsed``

    def track(v, tn):
        nonlocal max_err, checking
        if exact is not None:
            tic = time.perf_counter()
            max_err = max(max_err, float(np.max(np.abs(v - exact(x_in, tn)), initial=0.0)))
            checking += time.perf_counter() - tic

    track(u0, 0.0)
    stored = [u0.copy()] if keep == "all" else []
    info: dict = {}
    start = time.perf_counter()
    if fast:
        soe = build_soe(1.0 + p.params.alpha, soe_eps, mesh.min_step, max(mesh.T, 1.0))
        info["n_exp"] = soe.n_exp
        fh = FastHistory(p.params, mesh, soe, u0)
        prev2, prev = None, u0
        for n in range(1, N + 1):
            if n >= 2:
                fh.update(n, prev, prev2)
            diag, known = fh.split(n, prev)
            un = _solve_shifted_laplacian(coef, diag, forcing(n) - known)
            prev2, prev = prev, un
            track(un, t[n])
            if keep == "all":
                stored.append(un)
        final = prev
    else:
        U = np.empty((N + 1, x_in.size))
        U[0] = u0
        for n in range(1, N + 1):
            c = l1_step_coefficients(mesh, p.params, n)
            rhs = forcing(n) - c[:n] @ U[:n]
            U[n] = _solve_shifted_laplacian(coef, c[n], rhs)
            track(U[n], t[n])
        final = U[N]
        if keep == "all":
            stored = list(U)
    elapsed = time.perf_counter() - start - checking

    def pad(v):
        return np.concatenate([[0.0], v, [0.0]])

    if keep == "all":
        times = np.asarray(t)
        fields = np.array([pad(v) for v in stored])
    else:
        times = np.array([t[-1]])
        fields = pad(final)[None, :]
    return DiffusionRun(
        "FastL1" if fast else "L1",
        grid,
        times,
        fields,
        elapsed,
        info,
        max_err if exact is not None else None,
    )
