"""Scalar relaxation problem ``D^(alpha,rho) u = -k0 u + f(t)``, ``u(0) = u0``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tempfrac.l1 import l1_step_coefficients
from tempfrac.mesh import GradedMesh, TemperedParams
from tempfrac.soe import FastHistory, build_soe
from tempfrac.wsgl import build_wsgl_weights, wsgl_step_coefficients

SCHEMES = ("L1", "WSGL", "FastL1")


@dataclass
class SolverRun:
    """Trajectory ``values[n] ~ u(t_n)`` and the wall-clock time of the time loop."""

    scheme: str
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    elapsed: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.values[-1]


def _forcing_values(f, t: np.ndarray) -> np.ndarray:
    if f is None:
        return np.zeros_like(t)
    return np.broadcast_to(np.asarray(f(t), dtype=float), t.shape).copy()


def _solve_l1(params, mesh, k0, u0, fvals):
    u = np.empty(mesh.N + 1)
    u[0] = u0
    for n in range(1, mesh.N + 1):
        c = l1_step_coefficients(mesh, params, n)
        u[n] = (fvals[n] - c[:n] @ u[:n]) / (c[n] + k0)
    return u


def _solve_fast(params, mesh, k0, u0, fvals, soe_eps):
    soe = build_soe(1.0 + params.alpha, soe_eps, mesh.min_step, max(mesh.T, 1.0))
    fh = FastHistory(params, mesh, soe, u0)
    u = np.empty(mesh.N + 1)
    u[0] = u0
    for n in range(1, mesh.N + 1):
        if n >= 2:
            fh.update(n, u[n - 1], u[n - 2])
        diag, known = fh.split(n, u[n - 1])
        u[n] = (fvals[n] - known) / (diag + k0)
    return u, soe


def _solve_wsgl(params, mesh, k0, u0, fvals, m, sigmas):
    weights = build_wsgl_weights(params.alpha, mesh.N, m, sigmas)
    N = mesh.N
    u = np.empty(N + 1)
    u[0] = u0
    if m:
        # correction terms couple the first m unknowns: solve them as one block
        A = np.zeros((m, m))
        b = np.empty(m)
        for n in range(1, m + 1):
            c = wsgl_step_coefficients(params, mesh, weights, n)
            A[n - 1] = c[1 : m + 1]
            A[n - 1, n - 1] += k0
            b[n - 1] = fvals[n] - c[0] * u0
        u[1 : m + 1] = np.linalg.solve(A, b)
    # same rows as wsgl_step_coefficients with every n-independent part precomputed:
    # reversed weighted kernel (contiguous history dot), tempered starting
    # weights and the u0 coefficient
    rho, t = params.rho, mesh.nodes
    scale = (mesh.T / N) ** (-params.alpha)
    g = weights.conv * np.exp(-rho * t)
    g_rev = g[::-1].copy()
    n_idx = np.arange(N + 1)
    k = np.arange(1, m + 1)
    start = weights.start * np.exp(-rho * (n_idx[:, None] - k) * (mesh.T / N))
    u0_coef = -np.exp(-rho * t) * (np.cumsum(weights.conv) + weights.start.sum(axis=1))
    rhs = fvals - scale * u0_coef * u0
    diag = scale * g[0] + k0
    for n in range(m + 1, N + 1):
        hist = g_rev[N - n : N] @ u[:n]
        if m:
            hist += start[n] @ u[1 : m + 1]
        u[n] = (rhs[n] - scale * hist) / diag
    return u, weights


def solve_benchmark_forced(
    params: TemperedParams,
    k0: float,
    u0: float,
    mesh: GradedMesh,
    scheme: str = "L1",
    forcing: Callable | None = None,
    *,
    m: int = 0,
    sigmas=None,
    soe_eps: float = 1e-9,
) -> SolverRun:
    """March ``D^(alpha,rho) u = -k0 u + forcing(t)`` over ``mesh``.

    ``scheme`` is ``"L1"`` (graded mesh), ``"WSGL"`` (uniform mesh, ``m``
    correction terms with exponents ``sigmas``, default ``alpha, 2 alpha, ...``)
    or ``"FastL1"`` (sum-of-exponentials history with precision ``soe_eps``).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if scheme == "WSGL" and not mesh.is_uniform:
        raise ValueError("the WSGL scheme requires a uniform mesh (r = 1)")
    fvals = _forcing_values(forcing, mesh.nodes)
    info: dict = {}
    start = time.perf_counter()
    if scheme == "L1":
        u = _solve_l1(params, mesh, k0, u0, fvals)
    elif scheme == "WSGL":
        u, weights = _solve_wsgl(params, mesh, k0, u0, fvals, m, sigmas)
        info["condition"] = weights.condition
        info["sigmas"] = weights.sigmas
    else:
        u, soe = _solve_fast(params, mesh, k0, u0, fvals, soe_eps)
        info["n_exp"] = soe.n_exp
    elapsed = time.perf_counter() - start
    return SolverRun(scheme, np.asarray(mesh.nodes), u, elapsed, info)


def solve_benchmark(
    params: TemperedParams, k0: float, u0: float, mesh: GradedMesh, scheme: str = "L1", **opts
) -> SolverRun:
    """Unforced relaxation ``D^(alpha,rho) u = -k0 u``."""
    return solve_benchmark_forced(params, k0, u0, mesh, scheme, None, **opts)
