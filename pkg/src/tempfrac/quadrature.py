"""Gauss-Legendre and Gauss-Jacobi rules mapped to arbitrary intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on ``[a, b]``.

    ``exponent`` is the power of the left-endpoint weight ``(s - a)^exponent``
    absorbed into the weights (0 for Legendre).
    """

    kind: str
    a: float
    b: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    exponent: float = 0.0

    def integrate(self, f) -> float:
        return np.sum(self.weights * f(self.nodes))


@lru_cache(maxsize=256)
def _legendre_reference(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=256)
def _jacobi_reference(n: int, exponent: float) -> tuple[np.ndarray, np.ndarray]:
    # weight (1 + x)^exponent on [-1, 1]
    x, w = roots_jacobi(n, 0.0, exponent)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """``n``-point Gauss-Legendre rule on ``[a, b]``, exact to degree ``2n - 1``."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    x, w = _legendre_reference(int(n))
    half = 0.5 * (b - a)
    return QuadratureRule("legendre", a, b, a + half * (x + 1.0), half * w)


def gauss_jacobi(n: int, a: float, b: float, exponent: float) -> QuadratureRule:
    """``n``-point rule for ``int_a^b (s - a)^exponent g(s) ds``.

    Exact when ``g`` is a polynomial of degree ``<= 2n - 1``.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if not exponent > -1.0:
        raise ValueError(f"endpoint exponent must exceed -1, got {exponent}")
    if exponent == 0.0:
        rule = gauss_legendre(n, a, b)
        return QuadratureRule("jacobi", a, b, rule.nodes, rule.weights, 0.0)
    x, w = _jacobi_reference(int(n), float(exponent))
    half = 0.5 * (b - a)
    return QuadratureRule(
        "jacobi", a, b, a + half * (x + 1.0), w * half ** (exponent + 1.0), exponent
    )


class QuadratureConvergenceError(ArithmeticError):
    """Panel refinement did not settle within the allowed order."""


_MIN_LEVELS = 40
_CONV_ORDERS = (12, 20, 32, 48)


def _graded_rule(
    t: float, exponent: float, n: int, levels: int = _MIN_LEVELS, both_ends: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Jacobi next to the singular endpoint, then dyadic Legendre panels;
    # with both_ends the panels also shrink towards t
    edges = t * 2.0 ** -np.arange(levels, -1, -1, dtype=float)
    if both_ends:
        tail = t - 0.5 * t * 2.0 ** -np.arange(1, _MIN_LEVELS + 1, dtype=float)
        edges = np.concatenate([edges[:-1], tail, [t]])
    head = gauss_jacobi(n, 0.0, edges[0], exponent)
    x, w = _legendre_reference(n)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = a + 0.5 * (b - a) * (x + 1.0)
    weights = 0.5 * (b - a) * w * nodes**exponent
    return (
        np.concatenate([head.nodes, nodes.ravel()]),
        np.concatenate([head.weights, weights.ravel()]),
    )


def singular_convolution(alpha: float, rho: float, k, t: float, g=None, tol: float = 1e-10):
    """``int_0^t exp(-rho s) s^(alpha-1) E_{alpha,alpha}(-k s^alpha) g(t - s) ds``.

    ``g`` defaults to 1; when given, the rule is also refined towards ``s = t``
    so that ``g`` may be weakly singular at 0. ``k`` may be complex. The result is checked by
    comparing successive quadrature orders; :class:`QuadratureConvergenceError`
    is raised when they disagree by more than ``tol``.
    """
    from tempfrac.mittag_leffler import mittag_leffler2

    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0.0:
        return 0.0
    # the head rule misses the k s^(2 alpha - 1) term; make it negligible there
    head = (0.01 * tol / max(abs(k), 1.0)) ** (0.5 / alpha)
    levels = max(_MIN_LEVELS, math.ceil(math.log2(t / head)))
    prev = None
    for n in _CONV_ORDERS:
        s, w = _graded_rule(t, alpha - 1.0, n, levels, g is not None)
        vals = np.exp(-rho * s) * mittag_leffler2(alpha, alpha, -k * s**alpha)
        if g is not None:
            vals = vals * g(t - s)
        total = np.sum(w * vals)
        if prev is not None and abs(total - prev) <= tol:
            return total
        prev = total
    raise QuadratureConvergenceError(
        f"convolution integral unresolved at t={t} (alpha={alpha}, rho={rho}, k={k})"
    )
