from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.special import erfc, rgamma

from tempfrac.laplace import (
    RationalILT,
    build_rational_ilt,
    invert_laplace,
    relaxation_function,
)
from tempfrac.mittag_leffler import MittagLefflerError, mittag_leffler, mittag_leffler2
from tempfrac.quadrature import gauss_jacobi, gauss_legendre, singular_convolution


def _ml_mpmath(alpha, beta, z, dps=50):
    # series in high precision; fine for moderate |z|
    with mpmath.workdps(dps):
        z = mpmath.mpmathify(z)
        return complex(mpmath.nsum(lambda k: z**k / mpmath.gamma(alpha * k + beta), [0, mpmath.inf]))


# -- Mittag-Leffler -------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.8, 1.0, 1.7, 2.0])
def test_ml_at_zero(alpha):
    assert mittag_leffler(alpha, 0.0) == 1.0


@pytest.mark.parametrize("z", [-1.0, 1.0, 2j])
def test_ml_alpha_one_is_exp(z):
    assert mittag_leffler(1.0, z) == pytest.approx(np.exp(z), rel=1e-12)


def test_ml_half_erfc_identity():
    x = 1.0
    assert mittag_leffler(0.5, -x) == pytest.approx(math.exp(x * x) * erfc(x), rel=1e-12)


def test_ml_two_parameter_identities():
    assert mittag_leffler2(0.7, 1.0, -2.3) == pytest.approx(mittag_leffler(0.7, -2.3), rel=1e-15)
    assert mittag_leffler2(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-12)


@given(
    st.floats(0.2, 1.0),
    st.floats(0.5, 2.0),
    st.floats(0.0, 50.0),
    st.floats(-math.pi, math.pi),
)
@settings(max_examples=60, deadline=None)
def test_ml_recurrence(alpha, beta, radius, angle):
    assume(radius ** (1.0 / alpha) < 600.0)  # keep exp(z^(1/alpha)) finite
    z = radius * complex(math.cos(angle), math.sin(angle))
    lhs = mittag_leffler2(alpha, beta, z)
    rhs = rgamma(beta) + z * mittag_leffler2(alpha, alpha + beta, z)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(z * mittag_leffler2(alpha, alpha + beta, z)))


@given(st.floats(-7.0, 7.0), st.floats(-7.0, 7.0))
@settings(max_examples=40, deadline=None)
def test_ml_alpha_two_is_cosh(x, y):
    z = complex(x, y)
    want = np.cosh(z)
    assert abs(mittag_leffler(2.0, z * z) - want) <= 1e-10 * max(1.0, abs(want))


@pytest.mark.parametrize(
    "alpha, beta, z",
    [(0.8, 1.0, -2.0), (0.4, 1.0, -5.0), (0.9, 0.9, -3.0 + 1.0j), (0.6, 1.0, 4.0), (0.8, 0.8, -10.0)],
)
def test_ml_against_mpmath(alpha, beta, z):
    want = _ml_mpmath(alpha, beta, z)
    assert abs(mittag_leffler2(alpha, beta, z) - want) <= 1e-12 * max(1.0, abs(want))


def test_ml_real_input_gives_real_output():
    out = mittag_leffler(0.8, np.array([-1.0, -20.0, -200.0]))
    assert out.dtype == float
    assert np.all(np.diff(out) < 0) and np.all(out > 0)


def test_ml_overflow_is_an_error():
    with pytest.raises(MittagLefflerError, match="overflows"):
        mittag_leffler(0.5, 27.0)


def test_ml_domain_errors():
    with pytest.raises(ValueError):
        mittag_leffler(2.5, 1.0)
    with pytest.raises(ValueError):
        mittag_leffler(0.5, np.inf)


# -- quadrature -----------------------------------------------------------------


def test_legendre_midpoint():
    r = gauss_legendre(1, 2.0, 5.0)
    assert r.nodes[0] == pytest.approx(3.5) and r.weights[0] == pytest.approx(3.0)


def test_legendre_exactness():
    assert gauss_legendre(5, 0.0, 1.0).integrate(lambda x: x**9) == pytest.approx(0.1, abs=1e-14)
    assert gauss_legendre(16, 0.0, 1.0).integrate(lambda x: x**20) == pytest.approx(1 / 21, abs=1e-13)


@pytest.mark.parametrize("n", [1, 3, 8, 20])
def test_legendre_monomial_basis(n):
    r = gauss_legendre(n, -0.5, 2.0)
    for k in range(2 * n):
        want = (2.0 ** (k + 1) - (-0.5) ** (k + 1)) / (k + 1)
        assert r.integrate(lambda x: x**k) == pytest.approx(want, rel=1e-13, abs=1e-13)


def test_jacobi_reduces_to_legendre():
    a, b = gauss_jacobi(6, 0.0, 2.0, 0.0), gauss_legendre(6, 0.0, 2.0)
    np.testing.assert_array_equal(a.nodes, b.nodes)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_jacobi_closed_form():
    r = gauss_jacobi(4, 0.0, 1.0, -0.5)
    assert r.integrate(lambda s: s) == pytest.approx(2.0 / 3.0, abs=1e-13)


@pytest.mark.parametrize("exponent", [-0.9, -0.5, 0.3])
def test_jacobi_weighted_monomials(exponent):
    n, a, b = 7, 0.0, 3.0
    r = gauss_jacobi(n, a, b, exponent)
    for k in range(2 * n):
        want = b ** (k + exponent + 1) / (k + exponent + 1)
        assert r.integrate(lambda s: s**k) == pytest.approx(want, rel=1e-13)


def test_jacobi_nodes_inside_and_weights_positive():
    r = gauss_jacobi(20, 0.0, 1.0, -0.9)
    assert np.all((r.nodes > 0.0) & (r.nodes < 1.0))
    assert np.all(r.weights > 0.0)
    assert r.weights.sum() == pytest.approx(1.0 / 0.1, rel=1e-13)


def test_singular_convolution_cases():
    assert singular_convolution(0.7, 0.3, 1.0, 0.0) == 0.0
    t, a = 0.8, 0.6
    assert singular_convolution(a, 0.0, 0.0, t) == pytest.approx(t**a / math.gamma(a + 1), abs=1e-10)
    assert singular_convolution(0.8, 0.0, 1.0, 1.0) == pytest.approx(1 - mittag_leffler(0.8, -1.0), abs=1e-10)


def test_singular_convolution_tempered_against_mpmath():
    a, rho, k, t = 0.8, 0.5, 2.0, 0.7
    with mpmath.workdps(30):
        f = lambda s: mpmath.e ** (-rho * s) * s ** (a - 1) * mpmath.mpf(
            _ml_mpmath(a, a, -k * float(s) ** a).real
        )
        want = float(mpmath.quad(f, [0, 1e-6, 1e-3, 0.1, t]))
    assert singular_convolution(a, rho, k, t) == pytest.approx(want, abs=1e-9)


# -- rational inverse Laplace ---------------------------------------------------


def test_ilt_known_transforms():
    ilt = build_rational_ilt(14)
    t = np.array([0.1, 1.0, 10.0])
    np.testing.assert_allclose(invert_laplace(ilt, lambda s: 1.0 / s, t), 1.0, rtol=0, atol=1e-10)
    assert invert_laplace(ilt, lambda s: 1.0 / (s + 1.0), 1.0) == pytest.approx(math.exp(-1), abs=1e-10)
    got = invert_laplace(ilt, lambda s: s**-0.2 / (s**0.8 + 1.0), 1.0)
    assert got == pytest.approx(mittag_leffler(0.8, -1.0), abs=1e-8)
    # a shifted pair: L{exp(-t) t} = 1/(s+1)^2
    assert ilt(lambda s: 1.0 / (s + 1.0) ** 2, 2.0) == pytest.approx(2.0 * math.exp(-2.0), abs=1e-10)


@pytest.mark.parametrize("K", [12, 14, 16])
def test_ilt_orders_validate(K):
    ilt = build_rational_ilt(K)
    assert isinstance(ilt, RationalILT) and ilt.poles.size == K
    z, c = ilt.upper
    assert z.size == K // 2


def test_ilt_conjugate_symmetry():
    ilt = build_rational_ilt(14)
    z, c = ilt.poles, ilt.residues
    for zj, cj in zip(z, c):
        k = np.argmin(np.abs(z - np.conj(zj)))
        assert z[k] == np.conj(zj) and c[k] == np.conj(cj)
    # the full (both half planes) sum of a real transform is real
    F = lambda s: 1.0 / (s + 0.5)
    full = -np.sum(c * F(z)) / 1.0
    assert abs(full.imag) <= 1e-12 * abs(full.real)


def test_ilt_invalid_order():
    with pytest.raises(ValueError):
        build_rational_ilt(7)
    with pytest.raises(ValueError):
        build_rational_ilt(22)
    with pytest.raises(ValueError):
        invert_laplace(build_rational_ilt(14), lambda s: 1 / s, 0.0)


@pytest.mark.parametrize("alpha", [0.4, 0.8, 1.0])
def test_relaxation_function_matches_ml(alpha):
    t = np.linspace(0.0, 3.0, 31)
    k = 0.5 + 2.0j
    want = mittag_leffler(alpha, -k * t**alpha + 0j)
    np.testing.assert_allclose(relaxation_function(alpha, k, t), want, rtol=0, atol=1e-10)
