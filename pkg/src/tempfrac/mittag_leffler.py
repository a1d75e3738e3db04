r"""Mittag-Leffler functions :math:`E_{\alpha,\beta}(z)` for real and complex arguments.

Three regimes are used:

* the Taylor series :math:`\sum_k z^k / \Gamma(\alpha k + \beta)` for :math:`|z| \le 1`;
* the asymptotic expansion for :math:`|z| > 50` when :math:`\alpha < 1`, accepted
  only when its smallest term falls below the target accuracy;
* otherwise, inversion of the Laplace transform
  :math:`s^{\alpha-\beta} / (s^\alpha - z)` along an optimally placed parabolic
  contour (Garrappa, SIAM J. Numer. Anal. 53, 2015), with the residues of the
  poles lying to the right of the contour added back.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import rgamma

_LOG_EPS = math.log(np.finfo(float).eps)
_LOG_MAX = math.log(np.finfo(float).max)
_SERIES_RADIUS = 1.0
_ASYMPTOTIC_RADIUS = 50.0
_MAX_TERMS = 2000


class MittagLefflerError(ArithmeticError):
    """Raised when none of the evaluation strategies converges."""


def _taylor(z: complex, alpha: float, beta: float, tol: float) -> complex:
    total = 0.0 + 0.0j
    zk = 1.0 + 0.0j
    for k in range(_MAX_TERMS):
        term = zk * rgamma(alpha * k + beta)
        total += term
        # past the minimum of Gamma the terms decrease monotonically in size
        arg = alpha * k + beta
        if arg > 2.0 and abs(zk) * rgamma(arg) <= tol * max(abs(total), 1e-300):
            return total
        zk *= z
    raise MittagLefflerError(f"Taylor series did not converge for z={z}")


def _asymptotic(z: complex, alpha: float, beta: float, tol: float) -> complex | None:
    arg = abs(np.angle(z))
    total = 0.0 + 0.0j
    if arg < alpha * math.pi:
        zroot = z ** (1.0 / alpha)
        total += z ** ((1.0 - beta) / alpha) * np.exp(zroot) / alpha
    zinv = 1.0 / z
    zk = 1.0 + 0.0j
    previous = math.inf
    for k in range(1, _MAX_TERMS):
        zk *= zinv
        term = zk * rgamma(beta - alpha * k)
        size = abs(term)
        if size > previous and size > 0.0:
            return None  # divergence set in before reaching the target accuracy
        total -= term
        if 0.0 < size <= tol * abs(total):
            return total
        if size > 0.0:
            previous = size
    return None


# -- optimal parabolic contour --------------------------------------------------


def _param_bounded(t, phi_j, phi_j1, pj, qj, log_eps):
    fac = 1.01
    f_max = math.exp(log_eps - _LOG_EPS)
    sq_j = math.sqrt(phi_j)
    threshold = 2.0 * math.sqrt((log_eps - _LOG_EPS) / t)
    sq_j1 = min(math.sqrt(phi_j1), threshold - sq_j)
    f_bar = None
    if pj < 1e-14 and qj < 1e-14:
        sqbar_j, sqbar_j1 = sq_j, sq_j1
        f_bar = 1.0
        admissible = True
    elif pj < 1e-14:
        sqbar_j = sq_j
        f_min = fac * (sq_j / (sq_j1 - sq_j)) ** qj if sq_j > 0 else fac
        admissible = f_min < f_max
        if admissible:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fq = f_bar ** (-1.0 / qj)
            sqbar_j1 = (2.0 * sq_j1 - fq * sq_j) / (2.0 + fq)
    elif qj < 1e-14:
        sqbar_j1 = sq_j1
        f_min = fac * (sq_j1 / (sq_j1 - sq_j)) ** pj
        admissible = f_min < f_max
        if admissible:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1.0 / pj)
            sqbar_j = (2.0 * sq_j + fp * sq_j1) / (2.0 - fp)
    else:
        f_min = fac * (sq_j + sq_j1) / (sq_j1 - sq_j) ** max(pj, qj)
        admissible = f_min < f_max
        if admissible:
            f_min = max(f_min, 1.5)
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1.0 / pj)
            fq = f_bar ** (-1.0 / qj)
            w = -phi_j1 * t / log_eps
            den = 2.0 + w - (1.0 + w) * fp + fq
            sqbar_j = ((2.0 + w + fq) * sq_j + fp * sq_j1) / den
            sqbar_j1 = (-(1.0 + w) * fq * sq_j + (2.0 + w - (1.0 + w) * fp) * sq_j1) / den
    if not admissible:
        return 0.0, 0.0, math.inf
    log_eps = log_eps - math.log(f_bar)
    w = -(sqbar_j1**2) * t / log_eps
    mu = (((1.0 + w) * sqbar_j + sqbar_j1) / (2.0 + w)) ** 2
    h = -2.0 * math.pi / log_eps * (sqbar_j1 - sqbar_j) / ((1.0 + w) * sqbar_j + sqbar_j1)
    N = math.ceil(math.sqrt(1.0 - log_eps / t / mu) / h)
    return mu, h, N


def _param_unbounded(t, phi_j, pj, log_eps):
    sq_phi_j = math.sqrt(phi_j)
    phibar_j = phi_j * 1.01 if phi_j > 0 else 0.01
    sqbar_j = math.sqrt(phibar_j)
    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    for _ in range(100):
        phi_t = phibar_j * t
        log_eps_phi_t = log_eps / phi_t
        N = math.ceil(phi_t / math.pi * (1.0 - 1.5 * log_eps_phi_t + math.sqrt(1.0 - 2.0 * log_eps_phi_t)))
        A = math.pi * N / phi_t
        sq_mu = sqbar_j * abs(4.0 - A) / abs(7.0 - math.sqrt(1.0 + 12.0 * A))
        fbar = ((sqbar_j - sq_phi_j) / sq_mu) ** (-pj)
        if pj < 1e-14 or f_min < fbar < f_max:
            break
        sqbar_j = f_tar ** (-1.0 / pj) * sq_mu + sq_phi_j
        phibar_j = sqbar_j**2
    mu = sq_mu**2
    h = (-3.0 * A - 2.0 + 2.0 * math.sqrt(1.0 + 12.0 * A)) / (4.0 - A) / N
    threshold = (log_eps - _LOG_EPS) / t
    if mu > threshold:
        Q = 0.0 if abs(pj) < 1e-14 else f_tar ** (-1.0 / pj) * math.sqrt(mu)
        phibar_j = (Q + math.sqrt(phi_j)) ** 2
        if phibar_j < threshold:
            w = math.sqrt(_LOG_EPS / (_LOG_EPS - log_eps))
            u = math.sqrt(-phibar_j * t / _LOG_EPS)
            mu = threshold
            N = math.ceil(w * log_eps / 2.0 / math.pi / (u * w - 1.0))
            h = math.sqrt(_LOG_EPS / (_LOG_EPS - log_eps)) / N
        else:
            N, h = math.inf, 0.0
    return mu, h, N


def _contour(z: complex, alpha: float, beta: float, log_eps: float) -> complex:
    t = 1.0
    theta = math.atan2(z.imag, z.real)
    kmin = math.ceil(-alpha / 2.0 - theta / (2.0 * math.pi))
    kmax = math.floor(alpha / 2.0 - theta / (2.0 * math.pi))
    k = np.arange(kmin, kmax + 1)
    s_star = abs(z) ** (1.0 / alpha) * np.exp(1j * (theta + 2.0 * math.pi * k) / alpha)
    phi = (s_star.real + np.abs(s_star)) / 2.0
    order = np.argsort(phi, kind="stable")
    s_star, phi = s_star[order], phi[order]
    keep = phi > 1e-15
    s_star = np.concatenate([[0.0], s_star[keep]])
    phi = np.concatenate([[0.0], phi[keep], [math.inf]])
    J1 = s_star.size
    p = np.concatenate([[max(0.0, -2.0 * (alpha - beta + 1.0))], np.ones(J1 - 1)])
    q = np.concatenate([np.ones(J1 - 1), [math.inf]])

    for _ in range(20):
        admissible = np.flatnonzero(
            (phi[:-1] < (log_eps - _LOG_EPS) / t) & (phi[:-1] < phi[1:])
        )
        params = {}
        for j in admissible:
            if j < J1 - 1:
                params[j] = _param_bounded(t, phi[j], phi[j + 1], p[j], q[j], log_eps)
            else:
                params[j] = _param_unbounded(t, phi[j], p[j], log_eps)
        if params and min(v[2] for v in params.values()) <= 200:
            break
        log_eps += math.log(10.0)
    else:
        raise MittagLefflerError(f"no admissible contour for z={z}, alpha={alpha}")

    j = min(params, key=lambda key: params[key][2])
    mu, h, N = params[j]
    u = h * np.arange(-N, N + 1)
    s = mu * (1j * u + 1.0) ** 2
    ds = -2.0 * mu * u + 2.0j * mu
    F = s ** (alpha - beta) / (s**alpha - z) * ds
    integral = h * np.sum(np.exp(s * t) * F) / (2.0j * math.pi)
    poles = s_star[j + 1 :]
    if poles.size and poles.real.max() > _LOG_MAX:
        raise MittagLefflerError(f"E_{{{alpha},{beta}}}({z}) overflows double precision")
    residues = np.sum(poles ** (1.0 - beta) * np.exp(t * poles)) / alpha
    return complex(integral + residues)


def _ml_scalar(z: complex, alpha: float, beta: float, tol: float) -> complex:
    az = abs(z)
    if az < 1e-15:
        return complex(rgamma(beta))
    if az <= _SERIES_RADIUS:
        return _taylor(z, alpha, beta, tol)
    if az > _ASYMPTOTIC_RADIUS and alpha < 1.0:
        value = _asymptotic(z, alpha, beta, tol)
        if value is not None:
            return value
    return _contour(z, alpha, beta, math.log(tol))


def mittag_leffler2(alpha: float, beta: float, z, tol: float = 1e-15):
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)``.

    ``z`` may be a scalar or an array, real or complex. Real input yields real
    output. ``alpha`` must lie in ``(0, 2]``.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if not 1e-16 <= tol <= 1e-6:
        raise ValueError(f"tolerance must lie in [1e-16, 1e-6], got {tol}")
    zarr = np.asarray(z)
    is_real = not np.iscomplexobj(zarr)
    flat = zarr.astype(complex).ravel()
    out = np.empty(flat.shape, dtype=complex)
    if alpha == 1.0 and beta == 1.0:
        out = np.exp(flat)
    else:
        for i, zi in enumerate(flat):
            if not np.isfinite(zi):
                raise ValueError(f"Mittag-Leffler argument must be finite, got {zi}")
            out[i] = _ml_scalar(complex(zi), float(alpha), float(beta), tol)
    out = out.reshape(zarr.shape)
    if is_real:
        out = out.real
    return out[()] if out.ndim == 0 else out


def mittag_leffler(alpha: float, z, tol: float = 1e-15):
    """One-parameter Mittag-Leffler function ``E_alpha(z) = E_{alpha,1}(z)``."""
    return mittag_leffler2(alpha, 1.0, z, tol)


__all__ = ["MittagLefflerError", "mittag_leffler", "mittag_leffler2"]
