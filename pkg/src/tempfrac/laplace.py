"""Rational inverse Laplace transform from a Caratheodory-Fejer approximation.

The poles of a type-(K, K) rational approximation of ``exp(z)`` on the negative
real axis come from the singular value decomposition of a Hankel matrix of
Chebyshev coefficients (after mapping the axis to the unit interval). The
residues are then fitted by linear least squares on the same mapped grid.
Poles ``z_j`` and residues ``c_j`` give

    f(t) ~ -2 Re sum_{Im z_j > 0} c_j F(z_j / t) / t .
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import hankel

from tempfrac.mittag_leffler import mittag_leffler

_CHEB_DEGREE = 75
_FFT_SIZE = 1024
_SCALE = 9.0
VALIDATION_TOL = 1e-10
ML_VALIDATION_TOL = 1e-8


class RationalILTError(ArithmeticError):
    """Pole/residue construction failed its known-transform checks."""


@dataclass(frozen=True)
class RationalILT:
    """Poles and residues of the order-``K`` rational approximation of ``exp``."""

    K: int
    poles: np.ndarray = field(repr=False)
    residues: np.ndarray = field(repr=False)

    @property
    def upper(self) -> tuple[np.ndarray, np.ndarray]:
        """Poles in the upper half plane and their residues (one per conjugate pair)."""
        keep = self.poles.imag > 0
        return self.poles[keep], self.residues[keep]

    def __call__(self, F: Callable, t) -> np.ndarray:
        return invert_laplace(self, F, t)


def _cf_poles_residues(K: int) -> tuple[np.ndarray, np.ndarray]:
    nf = _FFT_SIZE
    w = np.exp(2j * np.pi * np.arange(nf) / nf)
    t = w.real
    scl = _SCALE
    F = np.exp(scl * (t - 1.0) / (t + 1.0 + 1e-16))
    c = np.real(np.fft.fft(F)) / nf
    n = K
    Vh = np.linalg.svd(hankel(c[1 : _CHEB_DEGREE + 1]))[2]
    v = Vh[n, :]
    zr = np.roots(v)
    qk = zr[np.abs(zr) > 1.0]
    zk = scl * (qk - 1.0) ** 2 / (qk + 1.0) ** 2
    # residues: linear least squares for exp on the mapped Chebyshev grid of (-inf, 0]
    theta = np.linspace(0.0, np.pi, 4 * _FFT_SIZE + 1)[:-1]
    x = scl * (np.cos(theta) - 1.0) / (np.cos(theta) + 1.0)
    A = np.column_stack([1.0 / (x[:, None] - zk[None, :]), np.ones_like(x)])
    sol = np.linalg.lstsq(A, np.exp(x).astype(complex), rcond=None)[0]
    ck = sol[:-1]
    # enforce exact conjugate pairing so real transforms invert to real values
    order = np.lexsort((zk.imag, zk.real))
    zk, ck = zk[order], ck[order]
    for j in range(zk.size):
        if zk[j].imag > 0:
            k = int(np.argmin(np.abs(zk - np.conj(zk[j]))))
            zk[k] = np.conj(zk[j])
            ck[j] = 0.5 * (ck[j] + np.conj(ck[k]))
            ck[k] = np.conj(ck[j])
    return zk, ck


def invert_laplace(ilt: RationalILT, F: Callable, t) -> np.ndarray:
    """``-2 Re sum c_j F(z_j/t)/t`` over the upper-half-plane poles.

    ``F`` is called with one complex argument at a time and may return a
    scalar or an array (for example a vector of mode coefficients).
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0):
        raise ValueError("inversion requires t > 0")
    z, c = ilt.upper
    out = []
    for tt in t_arr.ravel():
        acc = sum(cj * np.asarray(F(zj / tt)) for zj, cj in zip(z, c))
        out.append(-2.0 * np.real(acc) / tt)
    res = np.array(out)
    return res.reshape(t_arr.shape + res.shape[1:])


def _validate(ilt: RationalILT) -> None:
    checks = [
        ("1/s", lambda s: 1.0 / s, np.array([0.1, 1.0, 10.0]), np.ones(3), VALIDATION_TOL),
        ("1/(s+1)", lambda s: 1.0 / (s + 1.0), np.array([1.0]), np.array([np.exp(-1.0)]), VALIDATION_TOL),
        (
            "s^(a-1)/(s^a+1), a=0.8",
            lambda s: s**-0.2 / (s**0.8 + 1.0),
            np.array([1.0]),
            np.array([mittag_leffler(0.8, -1.0)]),
            ML_VALIDATION_TOL,
        ),
    ]
    for name, F, ts, want, tol in checks:
        got = invert_laplace(ilt, F, ts)
        err = float(np.max(np.abs(got - want)))
        if not err <= tol:
            raise RationalILTError(
                f"order-{ilt.K} rational inversion of {name} misses by {err:.2e} (tol {tol:.0e})"
            )


@lru_cache(maxsize=16)
def build_rational_ilt(K: int = 14) -> RationalILT:
    """Build and validate the order-``K`` poles/residues (``K`` even, 8..20)."""
    if K % 2 or not 8 <= K <= 20:
        raise ValueError(f"K must be even and in [8, 20], got {K}")
    z, c = _cf_poles_residues(K)
    if z.size != K:
        raise RationalILTError(f"expected {K} poles, found {z.size}")
    z.setflags(write=False)
    c.setflags(write=False)
    ilt = RationalILT(K, z, c)
    _validate(ilt)
    return ilt


def relaxation_function(alpha: float, k, t, K: int = 14) -> np.ndarray:
    """``E_alpha(-k t^alpha)`` for ``t >= 0`` and complex ``k`` with ``Re k >= 0``.

    The transform ``s^(alpha-1) / (s^alpha + k)`` has at most one pole off the
    branch cut, at ``s* = (-k)^(1/alpha)`` with residue ``1/alpha``. Its term
    ``exp(s* t)/alpha`` is added in closed form and the remainder is inverted
    with all ``K`` rational poles (the result is complex in general).
    Vectorized over ``t``.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0,1], got {alpha}")
    k = complex(k)
    if k.real < 0.0:
        raise ValueError(f"need Re k >= 0, got {k}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be nonnegative")
    out = np.ones(t.shape, dtype=complex)
    pos = t > 0.0
    tt = t[pos]
    if alpha == 1.0:
        out[pos] = np.exp(-k * tt)
        return out
    if k == 0.0:
        return out
    ilt = build_rational_ilt(K)
    z, c = ilt.upper
    z = np.concatenate([z, np.conj(z)])[:, None]
    c = np.concatenate([c, np.conj(c)])[:, None]
    theta = np.angle(-k)
    pole = abs(k) ** (1.0 / alpha) * np.exp(1j * theta / alpha) if abs(theta) < alpha * np.pi else None
    s = z / tt[None, :]
    F = s ** (alpha - 1.0) / (s**alpha + k)
    if pole is not None:
        F = F - 1.0 / (alpha * (s - pole))
    val = -np.sum(c * F, axis=0) / tt
    if pole is not None:
        val = val + np.exp(pole * tt) / alpha
    out[pos] = val
    return out
