from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import gamma

from tempfrac.analytic import (
    BenchmarkProblem,
    BlochParams,
    DiffusionProblem,
    LayerSpec,
    TwoLayerProblem,
    benchmark_exact,
    benchmark_series,
    bloch_mplus_exact,
    bloch_mz_exact,
    diffusion_exact,
    forced_exact_solution,
    msd_exact,
    twolayer_semianalytic,
    twolayer_transform_solution,
)
from tempfrac.mesh import TemperedParams
from tempfrac.mittag_leffler import mittag_leffler


def test_benchmark_exact_special_cases():
    p = BenchmarkProblem(TemperedParams(0.6, 0.5), k0=2.0, u0=3.0)
    assert benchmark_exact(p, 0.0) == pytest.approx(3.0)
    q = BenchmarkProblem(TemperedParams(0.6, 0.5), k0=0.0, u0=3.0)
    t = np.linspace(0, 1, 5)
    np.testing.assert_allclose(benchmark_exact(q, t), 3.0 * np.exp(-0.5 * t), rtol=1e-14)
    c = BenchmarkProblem(TemperedParams(1.0, 0.0), k0=2.0, u0=1.0)
    assert benchmark_exact(c, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-13)


def test_benchmark_continuity_in_alpha():
    t = np.linspace(0.1, 1.0, 10)
    near = benchmark_exact(BenchmarkProblem(TemperedParams(0.999, 0.5)), t)
    classical = np.exp(-0.5 * t) * np.exp(-2.0 * t)
    np.testing.assert_allclose(near, classical, rtol=2e-2)


def test_benchmark_series_small_t():
    p = BenchmarkProblem(TemperedParams(0.7, 0.5))
    t = np.linspace(0.0, 0.1, 11)
    np.testing.assert_allclose(benchmark_series(p, t), benchmark_exact(p, t), rtol=0, atol=1e-8)


def test_forced_solution_forcing_consistency():
    # the forcing is the tempered derivative of u, term by term
    p = TemperedParams(0.5, 0.3)
    u, f = forced_exact_solution(p, 2.0)
    t = np.array([0.25, 1.0])
    want_u = 2.0 * np.exp(-0.3 * t) * sum(t ** (0.5 * k) for k in range(9))
    np.testing.assert_allclose(u(t), want_u, rtol=1e-14)
    coef = [gamma(0.5 * k + 1) / gamma(0.5 * k + 0.5) for k in range(1, 9)]
    want_f = 2.0 * np.exp(-0.3 * t) * sum(c * t ** (0.5 * (k - 1)) for c, k in zip(coef, range(1, 9)))
    np.testing.assert_allclose(f(t), want_f, rtol=1e-14)


def test_bloch_mz_cases():
    p = BlochParams(TemperedParams(0.8, 0.5), T1p=1.0, Mz0=30.0)
    assert bloch_mz_exact(p, 0.0) == pytest.approx(30.0)
    c = BlochParams(TemperedParams(1.0, 0.0), T1p=1.5, Mz0=30.0)
    want = c.M0 + (c.Mz0 - c.M0) * math.exp(-1.0)
    assert bloch_mz_exact(c, 1.5) == pytest.approx(want, abs=1e-9)


def test_bloch_mz_heavy_tempering():
    t = np.linspace(0.05, 1.0, 8)
    light = bloch_mz_exact(BlochParams(TemperedParams(0.8, 0.5)), t)
    heavy = bloch_mz_exact(BlochParams(TemperedParams(0.8, 50.0)), t)
    assert np.all(heavy < light)
    assert np.all(np.diff(heavy) >= -1e-12)
    assert heavy[-1] < 0.1 * light[-1]


def test_bloch_mplus_cases():
    p = BlochParams(TemperedParams(0.7, 0.2), varpi0=3.0, Mx0=10.0, My0=40.0)
    assert bloch_mplus_exact(p, 0.0) == pytest.approx(10.0 + 40.0j)
    c = BlochParams(TemperedParams(1.0, 0.0), T2p=20.0, varpi0=0.0)
    t = np.linspace(0, 2, 5)
    np.testing.assert_allclose(bloch_mplus_exact(c, t), 100j * np.exp(-t / 20.0), rtol=1e-13)
    w = BlochParams(TemperedParams(1.0, 0.0), T2p=20.0, varpi0=5.0)
    np.testing.assert_allclose(np.abs(bloch_mplus_exact(w, t)), 100 * np.exp(-t / 20.0), rtol=1e-13)


def test_diffusion_single_mode():
    params = TemperedParams(0.8, 0.5)
    p = DiffusionProblem(params, 2.0, math.pi, np.sin)
    x = np.linspace(0, math.pi, 9)
    for t in (0.0, 0.3, 1.0):
        want = math.exp(-0.5 * t) * mittag_leffler(0.8, -2.0 * t**0.8) * np.sin(x)
        np.testing.assert_allclose(diffusion_exact(p, x, t), want, rtol=0, atol=1e-12)


def test_diffusion_other_length_and_boundaries():
    l = 2.0
    p = DiffusionProblem(TemperedParams(0.6, 0.1), 0.7, l, lambda x: np.sin(math.pi * x / l))
    x = np.array([0.0, 0.5, 1.0, l])
    t = 0.4
    want = math.exp(-0.1 * t) * mittag_leffler(0.6, -0.7 * (math.pi / l) ** 2 * t**0.6) * np.sin(math.pi * x / l)
    got = diffusion_exact(p, x, t)
    np.testing.assert_allclose(got, want, atol=1e-12)
    assert got[0] == 0.0 and abs(got[-1]) < 1e-14


def test_diffusion_with_source_steady_limit():
    # with rho = 0, f = 1 and psi = 0 the mode amplitudes tend to <1, phi_n>/(D lam^2)
    p = DiffusionProblem(TemperedParams(1.0, 0.0), 1.0, math.pi, lambda x: 0 * x, lambda x, t: 1.0 + 0 * x * t)
    x = np.array([math.pi / 2])
    got = diffusion_exact(p, x, 30.0, n_modes=60)
    assert got[0] == pytest.approx(x[0] * (math.pi - x[0]) / 2.0, abs=1e-3)


def test_msd_cases():
    t = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(msd_exact(TemperedParams(1.0, 0.0), 1.5, t), 3.0 * t)
    assert msd_exact(TemperedParams(0.5, 1.0), 1.0, 1.0) == pytest.approx(2 * math.exp(-1) / gamma(1.5))


def _symmetric_problem():
    params = TemperedParams(0.7, 0.3)
    a = LayerSpec(0.0, 1.0, params, 0.4, 0.1, -0.2)
    b = LayerSpec(1.0, 2.0, params, 0.4, 0.1, -0.2)
    return TwoLayerProblem(a, b, 1.0, 1.0)


def test_twolayer_symmetric_flux_vanishes():
    p = _symmetric_problem()
    for s in (0.5 + 0.0j, 2.0 + 3.0j):
        for closed in ("closed", "series"):
            tr = twolayer_transform_solution(p, s, closed)
            assert abs(tr.flux) <= 1e-12 * max(1.0, np.max(np.abs(tr.modes1)))


def test_twolayer_principal_branch_on_positive_axis():
    from tempfrac.analytic import _shifted_power

    layer = LayerSpec(0.0, 1.0, TemperedParams(0.6, 0.5), 1.0)
    v = _shifted_power(2.0 + 0.0j, layer)
    assert v.imag == 0.0 and v.real == pytest.approx(2.5**0.6)


def test_twolayer_reduces_to_single_layer():
    params = TemperedParams(0.8, 0.5)
    D, l = 0.5, 1.0
    a = LayerSpec(0.0, 0.4, params, D)
    b = LayerSpec(0.4, l, params, D)
    psi = lambda x: np.sin(math.pi * x / l)
    p = TwoLayerProblem(a, b, psi, psi, n_modes=100)
    single = DiffusionProblem(params, D, l, psi)
    x = np.linspace(0.0, l, 11)
    for t in (0.1, 1.0):
        np.testing.assert_allclose(twolayer_semianalytic(p, x, t), diffusion_exact(single, x, t), atol=1e-4)


def test_twolayer_boundaries_and_interface_continuity():
    l1 = LayerSpec(0.0, 0.5, TemperedParams(0.9, 0.1), 0.25, 0.1, -0.1)
    l2 = LayerSpec(0.5, 1.0, TemperedParams(0.8, 0.5), 0.5, 0.1, -0.1)
    p = TwoLayerProblem(l1, l2)
    for t in (0.01, 0.1, 1.0):
        ends = twolayer_semianalytic(p, [0.0, 1.0], t)
        np.testing.assert_allclose(ends, 0.0, atol=1e-10)
        h = 1e-9
        left, right = twolayer_semianalytic(p, [0.5 - h, 0.5 + h], t)
        assert abs(left - right) <= 1e-6


def test_twolayer_mode_truncation_self_consistency():
    l1 = LayerSpec(0.0, 0.5, TemperedParams(0.9, 0.1), 0.25, 0.1, -0.1)
    l2 = LayerSpec(0.5, 1.0, TemperedParams(0.8, 0.5), 0.5, 0.1, -0.1)
    x = np.linspace(0.0, 1.0, 21)
    coarse = twolayer_semianalytic(TwoLayerProblem(l1, l2, n_modes=200), x, 0.1)
    fine = twolayer_semianalytic(TwoLayerProblem(l1, l2, n_modes=400), x, 0.1)
    assert np.max(np.abs(coarse - fine)) < 1e-6


def test_twolayer_validation():
    l1 = LayerSpec(0.0, 0.5, TemperedParams(0.9), 0.25)
    l2 = LayerSpec(0.6, 1.0, TemperedParams(0.8), 0.5)
    with pytest.raises(ValueError):
        TwoLayerProblem(l1, l2)
    with pytest.raises(ValueError):
        LayerSpec(1.0, 0.5, TemperedParams(0.9), 0.25)
    ok = TwoLayerProblem(l1, LayerSpec(0.5, 1.0, TemperedParams(0.8), 0.5))
    with pytest.raises(ValueError):
        twolayer_semianalytic(ok, [0.2], 0.0)
    with pytest.raises(ValueError):
        twolayer_semianalytic(ok, [1.5], 0.1)
