"""Reference solutions: relaxation, Bloch, diffusion, mean squared displacement, two layers.

All solutions follow from the Laplace pair
``L{exp(-rho t) E_alpha(-k t^alpha)} = (s+rho)^(alpha-1) / ((s+rho)^alpha + k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma, rgamma

from tempfrac.laplace import RationalILT, build_rational_ilt, invert_laplace
from tempfrac.mesh import TemperedParams
from tempfrac.mittag_leffler import mittag_leffler
from tempfrac.quadrature import gauss_legendre, singular_convolution

# -- scalar relaxation ----------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkProblem:
    """``D^(alpha,rho) u = -k0 u`` on ``(0, T]`` with ``u(0) = u0``."""

    params: TemperedParams
    k0: float = 2.0
    u0: float = 1.0
    T: float = 1.0

    def __post_init__(self) -> None:
        if self.k0 < 0.0:
            raise ValueError(f"k0 must be >= 0, got {self.k0}")


def benchmark_exact(p: BenchmarkProblem, t):
    """``u0 exp(-rho t) E_alpha(-k0 t^alpha)``."""
    t = np.asarray(t, dtype=float)
    a, rho = p.params.alpha, p.params.rho
    return p.u0 * np.exp(-rho * t) * mittag_leffler(a, -p.k0 * t**a)


def benchmark_series(p: BenchmarkProblem, t, terms: int = 60):
    """Partial sums of the double series for the relaxation solution.

    Expands ``exp(-rho t)`` and ``E_alpha`` separately; intended for small ``t``.
    """
    t = np.asarray(t, dtype=float)
    a, rho = p.params.alpha, p.params.rho
    ml = sum((-p.k0) ** k * t ** (a * k) * rgamma(a * k + 1.0) for k in range(terms))
    ex = sum((-rho * t) ** j / math.factorial(j) for j in range(terms))
    return p.u0 * ex * ml


def forced_exact_solution(params: TemperedParams, u0: float = 1.0, terms: int = 8):
    """Exact solution ``u0 exp(-rho t) sum_{k=0}^{terms} t^(k alpha)`` and its forcing.

    Returns ``(u, f)``; ``f`` is the tempered derivative of ``u`` in closed form.
    """
    a, rho = params.alpha, params.rho
    ks = np.arange(terms + 1)

    def u(t):
        t = np.asarray(t, dtype=float)
        return u0 * np.exp(-rho * t) * sum(t ** (k * a) for k in ks)

    coef = [gamma(k * a + 1.0) / gamma(k * a + 1.0 - a) for k in ks[1:]]

    def f(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            total = sum(c * t ** ((k - 1) * a) for c, k in zip(coef, ks[1:]))
        return u0 * np.exp(-rho * t) * total

    return u, f


# -- Bloch ----------------------------------------------------------------------


@dataclass(frozen=True)
class BlochParams:
    """Tempered Bloch system with rescaled relaxation times ``T1p``, ``T2p``.

    ``varpi0`` is the (rescaled) Larmor frequency in rad per time unit.
    """

    params: TemperedParams
    T1p: float = 1.0
    T2p: float = 20.0
    varpi0: float = 0.0
    M0: float = 100.0
    Mz0: float = 0.0
    Mx0: float = 0.0
    My0: float = 100.0

    def __post_init__(self) -> None:
        if not (self.T1p > 0.0 and self.T2p > 0.0):
            raise ValueError("relaxation times T1p and T2p must be positive")

    @property
    def k3(self) -> complex:
        return 1j * self.varpi0 + 1.0 / self.T2p


def bloch_mz_exact(p: BlochParams, t):
    """Longitudinal magnetization: relaxation of ``Mz0`` plus the recovery integral."""
    a, rho = p.params.alpha, p.params.rho
    k1 = 1.0 / p.T1p
    t_arr = np.asarray(t, dtype=float)
    decay = p.Mz0 * np.exp(-rho * t_arr) * mittag_leffler(a, -k1 * t_arr**a)
    conv = np.array(
        [singular_convolution(a, rho, k1, float(tt)) for tt in t_arr.ravel()]
    ).reshape(t_arr.shape)
    return decay + p.M0 * k1 * conv


def bloch_mplus_exact(p: BlochParams, t):
    """Transverse magnetization ``Mx + i My``."""
    a, rho = p.params.alpha, p.params.rho
    t = np.asarray(t, dtype=float)
    m0 = p.Mx0 + 1j * p.My0
    return m0 * np.exp(-rho * t) * mittag_leffler(a, -p.k3 * t**a + 0j)


# -- single-layer diffusion -----------------------------------------------------


@dataclass(frozen=True)
class DiffusionProblem:
    """``D^(alpha,rho) u = D u_xx + f(x, t)`` on ``(0, l)`` with zero boundary values.

    ``psi`` is the initial profile, ``f`` the source (``None`` for none).
    """

    params: TemperedParams
    D: float
    l: float = math.pi
    psi: Callable = np.sin
    f: Callable | None = None
    T: float = 1.0

    def __post_init__(self) -> None:
        if not (self.D > 0.0 and self.l > 0.0):
            raise ValueError("D and l must be positive")


def _panel_rule(a: float, b: float, panels: int = 64, order: int = 16):
    edges = np.linspace(a, b, panels + 1)
    rules = [gauss_legendre(order, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return np.concatenate([r.nodes for r in rules]), np.concatenate([r.weights for r in rules])


def diffusion_exact(p: DiffusionProblem, x, t: float, n_modes: int = 200):
    """Truncated sine series of the exact solution at time ``t``.

    Sine coefficients of ``psi`` and ``f`` use Gauss-Legendre panels; the source
    enters through the singular convolution with ``E_{alpha,alpha}``.
    """
    a, rho = p.params.alpha, p.params.rho
    x = np.asarray(x, dtype=float)
    n = np.arange(1, n_modes + 1)
    lam = n * math.pi / p.l
    amp = math.sqrt(2.0 / p.l)
    xq, wq = _panel_rule(0.0, p.l)
    basis_q = amp * np.sin(np.outer(lam, xq)) * wq  # rows integrate against phi_n
    coeff = basis_q @ np.asarray(p.psi(xq), dtype=float)
    modes = coeff * math.exp(-rho * t) * mittag_leffler(a, -p.D * lam**2 * t**a)
    if p.f is not None and t > 0.0:
        for j in range(n_modes):

            def source_mode(tau, j=j):
                vals = np.asarray(p.f(xq[:, None], np.atleast_1d(tau)[None, :]), dtype=float)
                return basis_q[j] @ np.broadcast_to(vals, (xq.size, np.size(tau)))

            modes[j] += singular_convolution(a, rho, p.D * lam[j] ** 2, t, source_mode)
    phi = amp * np.sin(np.multiply.outer(x, lam))
    return phi @ modes


def msd_exact(params: TemperedParams, D: float, t):
    """Mean squared displacement ``exp(-rho t) 2 D t^alpha / Gamma(1 + alpha)``."""
    t = np.asarray(t, dtype=float)
    return np.exp(-params.rho * t) * 2.0 * D * t**params.alpha / gamma(1.0 + params.alpha)


# -- two layers -----------------------------------------------------------------


@dataclass(frozen=True)
class LayerSpec:
    """One layer ``[left, right]`` of a composite medium.

    The layer equation is ``D^(alpha,rho) X = D X_xx + Sa + Sb X``.
    """

    left: float
    right: float
    params: TemperedParams
    D: float
    Sa: float = 0.0
    Sb: float = 0.0

    def __post_init__(self) -> None:
        if not self.right > self.left:
            raise ValueError(f"empty layer [{self.left}, {self.right}]")
        if not self.D > 0.0:
            raise ValueError(f"diffusivity must be positive, got {self.D}")

    @property
    def width(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class TwoLayerProblem:
    """Two layers joined at ``layer1.right == layer2.left``.

    Initial data ``X10``, ``X20`` are constants or callables of ``x``. The outer
    boundary values ``fL``, ``fR`` are constants in time. ``n_modes`` is the
    eigenfunction count per layer.
    """

    layer1: LayerSpec
    layer2: LayerSpec
    X10: float | Callable = 1.0
    X20: float | Callable = 1.0
    fL: float = 0.0
    fR: float = 0.0
    n_modes: int = 100
    K: int = 14
    ilt: RationalILT | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not math.isclose(self.layer1.right, self.layer2.left):
            raise ValueError("layers must share the interface point")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")

    @property
    def interface(self) -> float:
        return self.layer1.right

    def inverter(self) -> RationalILT:
        return self.ilt if self.ilt is not None else build_rational_ilt(self.K)


@dataclass
class TwoLayerTransform:
    """Laplace-space mode coefficients of both layers at one ``s``."""

    s: complex
    flux: complex
    modes1: np.ndarray
    modes2: np.ndarray


def _eigenvalues(layer: LayerSpec, n_modes: int) -> np.ndarray:
    return (2.0 * np.arange(n_modes) + 1.0) * math.pi / (2.0 * layer.width)


def _initial_modes(layer: LayerSpec, lam: np.ndarray, data, first: bool) -> np.ndarray:
    amp = math.sqrt(2.0 / layer.width)
    if not callable(data):
        return float(data) * amp / lam  # <1, phi_n> in closed form
    x, w = _panel_rule(layer.left, layer.right)
    w = w * np.asarray(data(x), dtype=float)
    arg = (x - layer.left) if first else (layer.right - x)
    return amp * (np.sin(np.outer(lam, arg)) @ w)


def _layer_data(p: TwoLayerProblem):
    out = []
    for layer, data, first in ((p.layer1, p.X10, True), (p.layer2, p.X20, False)):
        lam = _eigenvalues(layer, p.n_modes)
        amp = math.sqrt(2.0 / layer.width)
        sign = (-1.0) ** np.arange(p.n_modes)
        out.append(
            {
                "layer": layer,
                "lam": lam,
                "amp": amp,
                "phi_iface": amp * sign,  # phi_n at the interface
                "dphi_outer": amp * lam * (1.0 if first else -1.0),  # phi_n' at the outer end
                "ones": amp / lam,
                "X0": _initial_modes(layer, lam, data, first),
            }
        )
    return out


def _shifted_power(s: complex, layer: LayerSpec) -> complex:
    return (s + layer.params.rho) ** layer.params.alpha


def _flux_kernel(layer: LayerSpec, s: complex) -> complex:
    # closed form of sum_n phi_n(l1)^2 / eta_n(s) = tanh(d sqrt(c/D)) / sqrt(c D)
    c = _shifted_power(s, layer) - layer.Sb
    k = np.sqrt(c / layer.D)
    return np.tanh(k * layer.width) / (layer.D * k)


def twolayer_transform_solution(
    p: TwoLayerProblem, s: complex, flux_sum: str = "closed", _data=None
) -> TwoLayerTransform:
    """Interface flux and layer mode coefficients in Laplace space.

    ``flux_sum="series"`` truncates the flux coefficient sum at ``n_modes``
    (slow, first-order convergence); ``"closed"`` uses its exact value.
    """
    data = _layer_data(p) if _data is None else _data
    d1, d2 = data
    L1, L2 = d1["layer"], d2["layer"]
    fLbar = p.fL / s
    fRbar = p.fR / s
    eta1 = _shifted_power(s, L1) + L1.D * d1["lam"] ** 2 - L1.Sb
    eta2 = _shifted_power(s, L2) + L2.D * d2["lam"] ** 2 - L2.Sb
    free1 = (
        (s + L1.params.rho) ** (L1.params.alpha - 1.0) * d1["X0"]
        + L1.D * fLbar * d1["dphi_outer"]
        + L1.Sa * d1["ones"] / s
    ) / eta1
    free2 = (
        (s + L2.params.rho) ** (L2.params.alpha - 1.0) * d2["X0"]
        - L2.D * fRbar * d2["dphi_outer"]
        + L2.Sa * d2["ones"] / s
    ) / eta2
    if flux_sum == "series":
        bracket = np.sum(d1["phi_iface"] ** 2 / eta1) + np.sum(d2["phi_iface"] ** 2 / eta2)
    elif flux_sum == "closed":
        bracket = _flux_kernel(L1, s) + _flux_kernel(L2, s)
    else:
        raise ValueError(f"flux_sum must be 'series' or 'closed', got {flux_sum!r}")
    if bracket == 0.0 or not np.isfinite(bracket):
        raise ArithmeticError(f"degenerate interface equation at s={s}")
    rhs = -np.sum(free1 * d1["phi_iface"]) + np.sum(free2 * d2["phi_iface"])
    flux = rhs / bracket
    modes1 = free1 + flux * d1["phi_iface"] / eta1
    modes2 = free2 - flux * d2["phi_iface"] / eta2
    return TwoLayerTransform(s, flux, modes1, modes2)


def _flux_profile(layer: LayerSpec, s: complex, x: np.ndarray, first: bool) -> np.ndarray:
    # closed form of sum_n phi_n(l1) phi_n(x) / eta_n(s)
    c = _shifted_power(s, layer) - layer.Sb
    k = np.sqrt(c / layer.D)
    dist = (x - layer.left) if first else (layer.right - x)
    # sinh(k dist)/cosh(k d) written with decaying exponentials
    ratio = (np.exp(k * (dist - layer.width)) - np.exp(-k * (dist + layer.width))) / (
        1.0 + np.exp(-2.0 * k * layer.width)
    )
    return ratio / (layer.D * k)


def twolayer_semianalytic(
    p: TwoLayerProblem, x, t: float, flux_sum: str = "closed"
) -> np.ndarray:
    """Semi-analytic solution at points ``x`` (anywhere in the composite) and time ``t > 0``.

    Each layer uses its truncated eigenfunction series. With
    ``flux_sum="closed"`` the interface-flux part, whose series converges only
    like ``1/n``, is summed exactly.
    """
    if not t > 0.0:
        raise ValueError("the semi-analytic solution needs t > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    l0, l2 = p.layer1.left, p.layer2.right
    if np.any((x < l0 - 1e-12) | (x > l2 + 1e-12)):
        raise ValueError("x outside the composite domain")
    data = _layer_data(p)
    d1, d2 = data
    in1 = x <= p.interface
    x1, x2 = x[in1], x[~in1]
    basis1 = d1["amp"] * np.sin(np.outer(x1 - p.layer1.left, d1["lam"]))
    basis2 = d2["amp"] * np.sin(np.outer(p.layer2.right - x2, d2["lam"]))

    def transform(s):
        tr = twolayer_transform_solution(p, s, flux_sum, data)
        out = np.empty(x.shape, dtype=complex)
        if flux_sum == "closed":
            L1, L2 = p.layer1, p.layer2
            eta1 = _shifted_power(s, L1) + L1.D * d1["lam"] ** 2 - L1.Sb
            eta2 = _shifted_power(s, L2) + L2.D * d2["lam"] ** 2 - L2.Sb
            free1 = tr.modes1 - tr.flux * d1["phi_iface"] / eta1
            free2 = tr.modes2 + tr.flux * d2["phi_iface"] / eta2
            out[in1] = basis1 @ free1 + tr.flux * _flux_profile(L1, s, x1, True)
            out[~in1] = basis2 @ free2 - tr.flux * _flux_profile(L2, s, x2, False)
        else:
            out[in1] = basis1 @ tr.modes1
            out[~in1] = basis2 @ tr.modes2
        return out

    return invert_laplace(p.inverter(), transform, t)
