"""Weighted shifted Grunwald-Letnikov (WSGL) formula with correction terms."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from tempfrac.mesh import GradedMesh, TemperedParams

MAX_CORRECTIONS = 8
ILL_CONDITIONED = 1.0e12


class IllConditionedWarning(RuntimeWarning):
    """The starting-weight system is close to singular."""


def grunwald_coefficients(alpha: float, N: int) -> np.ndarray:
    """``g_k = (-1)^k binom(alpha, k)`` for ``k = 0..N`` by the product recurrence."""
    k = np.arange(1, N + 1)
    g = np.empty(N + 1)
    g[0] = 1.0
    g[1:] = np.cumprod(1.0 - (alpha + 1.0) / k)
    return g


def wsgl_conv_weights(alpha: float, N: int) -> np.ndarray:
    """Convolution weights ``omega_0..omega_N`` of the second-order WSGL formula."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    g = grunwald_coefficients(alpha, int(N))
    w = 0.5 * (2.0 + alpha) * g
    w[1:] -= 0.5 * alpha * g[:-1]
    return w


def default_correction_exponents(alpha: float, m: int) -> tuple[float, ...]:
    """The ladder ``alpha, 2 alpha, ..., m alpha``."""
    return tuple((j + 1) * alpha for j in range(m))


@dataclass(frozen=True)
class WsglWeights:
    """Convolution and starting weights on a uniform grid with ``N`` steps.

    ``start[n, k-1]`` holds ``W_k^(n)`` for ``n = 0..N`` (row 0 is unused).
    """

    alpha: float
    N: int
    sigmas: tuple[float, ...]
    conv: np.ndarray = field(repr=False)
    start: np.ndarray = field(repr=False)
    condition: float = 1.0

    @property
    def m(self) -> int:
        return len(self.sigmas)


def _equilibrated_solve(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, float]:
    scale = np.abs(A).max(axis=0)
    As = A / scale
    X = np.linalg.solve(As, B)
    return X / scale[:, None], float(np.linalg.cond(As))


def wsgl_starting_weights(
    alpha: float, sigmas, N: int, conv: np.ndarray | None = None
) -> WsglWeights:
    """Solve, for every ``n``, the ``m x m`` system making the formula exact on ``t^sigma``.

    Warns with :class:`IllConditionedWarning` when the (column-equilibrated)
    exponential-Vandermonde matrix has condition number above ``1e12``.
    """
    sigmas = tuple(float(s) for s in sigmas)
    m = len(sigmas)
    if m > MAX_CORRECTIONS:
        raise ValueError(f"at most {MAX_CORRECTIONS} correction terms, got {m}")
    if any(s <= 0.0 for s in sigmas) or len(set(sigmas)) != m:
        raise ValueError(f"correction exponents must be distinct and positive: {sigmas}")
    if N <= m:
        raise ValueError(f"need N > m, got N={N}, m={m}")
    if conv is None:
        conv = wsgl_conv_weights(alpha, N)

    if m == 0:
        return WsglWeights(alpha, N, sigmas, conv, np.zeros((N + 1, 0)), 1.0)

    n = np.arange(N + 1, dtype=float)
    rhs = np.empty((m, N + 1))
    for j, s in enumerate(sigmas):
        powers = n**s
        exact = gamma(s + 1.0) / gamma(s + 1.0 - alpha) * n ** (s - alpha)
        rhs[j] = exact - np.convolve(conv, powers)[: N + 1]
    rhs[:, 0] = 0.0

    k = np.arange(1, m + 1, dtype=float)
    V = k[None, :] ** np.asarray(sigmas)[:, None]
    W, cond = _equilibrated_solve(V, rhs)
    if cond > ILL_CONDITIONED:
        warnings.warn(
            f"starting-weight matrix condition number {cond:.3e} exceeds "
            f"{ILL_CONDITIONED:.0e}; expect round-off in the corrections",
            IllConditionedWarning,
            stacklevel=2,
        )
    start = W.T.copy()
    start[0] = 0.0
    return WsglWeights(alpha, N, sigmas, conv, start, cond)


def build_wsgl_weights(alpha: float, N: int, m: int = 0, sigmas=None) -> WsglWeights:
    """Convenience wrapper using the default exponent ladder when ``sigmas`` is omitted."""
    if sigmas is None:
        sigmas = default_correction_exponents(alpha, m)
    return wsgl_starting_weights(alpha, sigmas, N)


def _check_uniform(mesh: GradedMesh, weights: WsglWeights) -> None:
    if not mesh.is_uniform:
        raise ValueError("the WSGL formula requires a uniform mesh (r = 1)")
    if mesh.N != weights.N:
        raise ValueError(f"weights built for N={weights.N}, mesh has N={mesh.N}")


def wsgl_step_coefficients(
    params: TemperedParams, mesh: GradedMesh, weights: WsglWeights, n: int
) -> np.ndarray:
    """Coefficients ``c_k`` with the discrete operator at ``t_n`` equal to ``sum_k c_k u_k``.

    The row has length ``max(n, m) + 1``: for ``n < m`` the correction terms
    reach samples beyond ``t_n``.
    """
    _check_uniform(mesh, weights)
    if not 1 <= n <= mesh.N:
        raise IndexError(f"step index {n} outside 1..{mesh.N}")
    alpha, rho, m = params.alpha, params.rho, weights.m
    tau = mesh.T / mesh.N
    t = mesh.nodes
    width = max(n, m) + 1
    c = np.zeros(width)

    # omega_{n-k} e^{-rho t_{n-k}} for k = 0..n
    decay = np.exp(-rho * t[: n + 1])
    c[: n + 1] = (weights.conv[: n + 1] * decay)[::-1]
    if m:
        W = weights.start[n]
        k = np.arange(1, m + 1)
        c[1 : m + 1] += W * np.exp(-rho * (n - k) * tau)
        wsum = W.sum()
    else:
        wsum = 0.0
    c[0] -= np.exp(-rho * t[n]) * (weights.conv[: n + 1].sum() + wsum)
    return c * tau ** (-alpha)


def wsgl_tempered_apply(
    params: TemperedParams, mesh: GradedMesh, weights: WsglWeights, history, n: int
):
    """Evaluate the WSGL tempered derivative at ``t_n`` from samples ``history``."""
    c = wsgl_step_coefficients(params, mesh, weights, n)
    u = np.asarray(history)
    if u.shape[0] < c.size:
        raise IndexError(f"history holds {u.shape[0]} samples, step {n} needs {c.size}")
    return c @ u[: c.size]
