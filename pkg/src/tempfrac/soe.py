"""Sum-of-exponentials kernels and the fast L1 history recurrence.

The power kernel is written as a Laplace integral

    t^(-beta) = 1/Gamma(beta) * int_0^inf exp(-t s) s^(beta-1) ds

and discretized with Gauss-Jacobi on ``[0, 2^-M]`` and Gauss-Legendre on
dyadic panels ``[2^j, 2^(j+1)]`` up to a cutoff where the tail is negligible
for all ``t >= sigma``. Accuracy is relative: ``|t^-beta - sum| <= eps t^-beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import gamma, gammaincc

from tempfrac.mesh import GradedMesh, TemperedParams
from tempfrac.quadrature import gauss_jacobi, gauss_legendre

N_VERIFY = 10_000


class SoeAccuracyError(ArithmeticError):
    """The constructed exponential sum misses the requested precision."""


@dataclass(frozen=True)
class SoeApprox:
    """``t^-beta ~ sum_i weights[i] exp(-nodes[i] t)`` for ``t`` in ``[sigma, T]``."""

    beta: float
    epsilon: float
    sigma: float
    T: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    max_rel_error: float = math.nan
    max_abs_error: float = math.nan
    panels: tuple[int, int, int] = (0, 0, 0)

    @property
    def n_exp(self) -> int:
        return int(self.nodes.size)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.multiply.outer(t, self.nodes)) @ self.weights


def soe_orders(epsilon: float, sigma: float, T: float) -> dict:
    """Quadrature orders and dyadic cutoffs for precision ``epsilon`` on ``[sigma, T]``."""
    log_eps = math.log(1.0 / epsilon)
    M = max(math.ceil(math.log2(T)), 0) + 4
    ns = math.ceil(0.3 * log_eps) + 2
    n0 = ns + 2
    nl = ns
    return {"M": M, "n0": n0, "ns": ns, "nl": nl}


def _upper_cutoff(beta: float, epsilon: float, sigma: float) -> int:
    # smallest J with the regularized tail Gamma(beta, sigma 2^(J+1)) / Gamma(beta) <= eps/10
    J = 0
    while gammaincc(beta, sigma * 2.0 ** (J + 1)) > 0.1 * epsilon:
        J += 1
    return J


def build_soe(beta: float, epsilon: float, sigma: float, T: float = 1.0) -> SoeApprox:
    """Construct and verify an exponential-sum approximation of ``t^-beta``.

    Raises :class:`SoeAccuracyError` when the relative deviation on 10^4
    log-spaced points of ``[sigma, T]`` exceeds ``epsilon``.
    """
    if not 0.0 < beta < 2.0:
        raise ValueError(f"beta must lie in (0,2), got {beta}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    if not 0.0 < sigma <= 1.0 <= T:
        raise ValueError(f"need 0 < sigma <= 1 <= T, got sigma={sigma}, T={T}")
    orders = soe_orders(epsilon, sigma, T)
    M, n0, ns, nl = orders["M"], orders["n0"], orders["ns"], orders["nl"]
    J = _upper_cutoff(beta, epsilon, sigma)

    nodes, weights = [], []
    head = gauss_jacobi(n0, 0.0, 2.0**-M, beta - 1.0)
    nodes.append(head.nodes)
    weights.append(head.weights)
    for j in range(-M, J + 1):
        rule = gauss_legendre(ns if j < 0 else nl, 2.0**j, 2.0 ** (j + 1))
        nodes.append(rule.nodes)
        weights.append(rule.weights * rule.nodes ** (beta - 1.0))
    s = np.concatenate(nodes)
    w = np.concatenate(weights) / gamma(beta)

    # drop terms that cannot matter anywhere on [sigma, T]
    # largest relative contribution of each term: t^beta w exp(-s t) peaks at t = beta/s
    t_peak = np.clip(beta / s, sigma, T)
    keep = w * np.exp(-s * t_peak) * t_peak**beta > 1e-3 * epsilon / s.size
    s, w = s[keep], w[keep]
    s.setflags(write=False)
    w.setflags(write=False)

    t = np.geomspace(sigma, T, N_VERIFY)
    exact = t**-beta
    approx = np.exp(-np.multiply.outer(t, s)) @ w
    dev = np.abs(approx - exact)
    rel = float(np.max(dev / exact))
    if not rel <= epsilon:
        raise SoeAccuracyError(
            f"exponential sum reaches relative error {rel:.3e} > {epsilon:.1e} "
            f"(beta={beta}, sigma={sigma}, T={T}, orders={orders}, J={J})"
        )
    return SoeApprox(
        beta, epsilon, sigma, T, s, w, rel, float(dev.max()), (n0, M, J + 1)
    )


# -- fast history --------------------------------------------------------------

_SERIES_SWITCH = 0.5
_SERIES_TERMS = 22


def _interp_factors(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(exp(-x) - 1 + x)/x^2`` and ``(1 - exp(-x) - x exp(-x))/x^2``."""
    x = np.asarray(x, dtype=float)
    fa = np.empty_like(x)
    fb = np.empty_like(x)
    small = x < _SERIES_SWITCH
    if np.any(small):
        xs = x[small]
        sa = np.zeros_like(xs)
        sb = np.zeros_like(xs)
        power = np.ones_like(xs)
        fact = 2.0  # (k + 2)!
        for k in range(_SERIES_TERMS):
            sa += power / fact
            sb += (k + 1) * power / fact
            power = power * (-xs)
            fact *= k + 3
        fa[small] = sa
        fb[small] = sb
    big = ~small
    if np.any(big):
        xb = x[big]
        e = np.exp(-xb)
        fa[big] = (e - 1.0 + xb) / xb**2
        fb[big] = (1.0 - e - xb * e) / xb**2
    return fa, fb


@njit(cache=True)
def _interp_pair(x):
    if x < _SERIES_SWITCH:
        fa = 0.0
        fb = 0.0
        power = 1.0
        fact = 2.0
        for k in range(_SERIES_TERMS):
            fa += power / fact
            fb += (k + 1) * power / fact
            power *= -x
            fact *= k + 3
        return fa, fb
    e = math.exp(-x)
    return (e - 1.0 + x) / (x * x), (1.0 - e - x * e) / (x * x)


@njit(cache=True, fastmath=True)
def _advance(acc, rate, tau_n, tau_p, u1, u2, weights, hist):
    # acc <- exp(-rate tau_n) (acc + tau_p (fa u1 + fb u2)), hist <- weights @ acc
    n_exp, size = acc.shape
    for j in range(size):
        hist[j] = 0.0
    for i in range(n_exp):
        fa, fb = _interp_pair(rate[i] * tau_p)
        d = math.exp(-rate[i] * tau_n)
        a = tau_p * fa
        b = tau_p * fb
        w = weights[i]
        row = acc[i]
        for j in range(size):
            v = d * (row[j] + a * u1[j] + b * u2[j])
            row[j] = v
            hist[j] += w * v


class FastHistory:
    """Per-node accumulators for the exponential-sum history of the fast L1 scheme.

    The kernel ``t^-(1+alpha)`` is replaced by ``soe``; ``acc[i]`` holds
    ``int_0^{t_{n-1}} exp(-(rho + s_i)(t_n - s)) u(s) ds`` for the current step
    ``n``, with ``u`` linearly interpolated between samples. Samples may be
    scalars or arrays (one accumulator row per SOE node).
    """

    def __init__(self, params: TemperedParams, mesh: GradedMesh, soe: SoeApprox, u0=0.0):
        if params.alpha >= 1.0:
            raise ValueError("the fast history needs alpha < 1")
        if not math.isclose(soe.beta, 1.0 + params.alpha):
            raise ValueError(f"SOE built for beta={soe.beta}, need {1.0 + params.alpha}")
        self.params = params
        self.mesh = mesh
        self.soe = soe
        self.u0 = np.asarray(u0, dtype=float)
        self.rate = params.rho + soe.nodes
        self.acc = np.zeros((soe.n_exp, self.u0.size))
        self._hist = np.zeros(self.u0.size)
        self.step = 1  # accumulators hold U_his(t_1) = 0
        a = params.alpha
        self._g2 = gamma(2.0 - a)
        self._g1 = gamma(1.0 - a)

    def update(self, n: int, u_prev, u_prev2) -> None:
        """Advance the accumulators from ``t_{n-1}`` to ``t_n`` (``n >= 2``)."""
        if n != self.step + 1:
            raise RuntimeError(f"accumulators hold step {self.step}, cannot move to {n}")
        tau_n = self.mesh.steps[n - 1]
        tau_p = self.mesh.steps[n - 2]
        size = self.u0.size
        u1 = np.ascontiguousarray(np.broadcast_to(u_prev, self.u0.shape), dtype=float)
        u2 = np.ascontiguousarray(np.broadcast_to(u_prev2, self.u0.shape), dtype=float)
        _advance(
            self.acc,
            self.rate,
            tau_n,
            tau_p,
            u1.reshape(size),
            u2.reshape(size),
            self.soe.weights,
            self._hist,
        )
        self.step = n

    def history(self) -> np.ndarray:
        """``sum_i w_i acc_i`` for the current step, shaped like ``u0``."""
        return self._hist.reshape(self.u0.shape).copy()

    def split(self, n: int, u_prev):
        """Return ``(diag, known)`` with the fast operator at ``t_n`` equal to ``diag*u_n + known``.

        Accumulators must already hold step ``n``.
        """
        if n >= 2 and self.step != n:
            raise RuntimeError(f"accumulators hold step {self.step}, expected {n}")
        a, rho = self.params.alpha, self.params.rho
        tau = self.mesh.steps[n - 1]
        diag = tau**-a / self._g2
        if n == 1:
            return diag, -np.exp(-rho * tau) * diag * np.asarray(u_prev)
        t_n = self.mesh.nodes[n]
        known = (
            -a * np.exp(-rho * tau) * diag * np.asarray(u_prev)
            - np.exp(-rho * t_n) * self.u0 / (self._g1 * t_n**a)
            - a / self._g1 * self._hist.reshape(self.u0.shape)
        )
        return diag, known


def fast_l1_step(fh: FastHistory, u_prev2, u_prev, u_n, n: int):
    """Fast tempered Caputo derivative at ``t_n`` given ``u_{n-2}, u_{n-1}, u_n``.

    Advances ``fh`` to step ``n`` when ``n >= 2``.
    """
    if n >= 2 and fh.step == n - 1:
        fh.update(n, u_prev, u_prev2)
    diag, known = fh.split(n, u_prev)
    return diag * np.asarray(u_n) + known
