import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gevreylab.equations import EquationSpec
from gevreylab.spectral import (
    EXPONENT_CAP,
    GevreyOverflowError,
    GevreyParams,
    GridSpec,
    SpectralField,
    apply_derivative,
    apply_gevrey,
    dealias_mask,
    gevrey_norm,
    gevrey_trusted,
    lp_norm,
    make_spacetime,
    to_physical,
    to_spectral,
    xsb_norm,
)

N = 32
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("n", [0, 7, 12, 4, True, 16.5])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        GridSpec(n, 1.0)


@pytest.mark.parametrize("length", [0.0, -1.0, math.inf, math.nan])
def test_grid_rejects_bad_length(length):
    with pytest.raises(ValueError):
        GridSpec(16, length)


def test_grid_layout():
    g = GridSpec(16, 4 * math.pi)
    assert g.x[0] == -2 * math.pi
    assert g.xi_max == pytest.approx(math.pi * 16 / (4 * math.pi))
    assert g.k[g.unpaired] == -8
    assert g.mode_index(-3) == 13
    with pytest.raises(ValueError):
        g.mode_index(8)


@pytest.mark.parametrize("j", [0, 1, -1, 5, -7])
def test_single_mode_has_unit_coefficient(j):
    g = GridSpec(N, 3.0)
    xi = 2 * math.pi * j / g.length
    c = to_spectral(g, np.exp(1j * xi * g.x)).coeffs
    expect = np.zeros(N, complex)
    expect[j % N] = 1.0
    np.testing.assert_allclose(c, expect, atol=1e-14)


@given(re=arrays(np.float64, N, elements=finite), im=arrays(np.float64, N, elements=finite))
def test_round_trip(re, im):
    g = GridSpec(N, 2.5)
    v = re + 1j * im
    np.testing.assert_allclose(to_physical(to_spectral(g, v)), v, atol=1e-12)


@given(v=arrays(np.float64, N, elements=finite))
def test_real_samples_stay_real(v):
    g = GridSpec(N, 1.0)
    f = to_spectral(g, v)
    assert f.real
    out = to_physical(f)
    assert out.dtype.kind == "f"
    np.testing.assert_allclose(out, v, atol=1e-12)


@given(v=arrays(np.complex128, N, elements=st.complex_numbers(max_magnitude=10)))
def test_plancherel(v):
    g = GridSpec(N, 7.0)
    f = to_spectral(g, v)
    assert gevrey_norm(f) == pytest.approx(lp_norm(f, 2), rel=1e-12, abs=1e-12)


@settings(max_examples=50)
@given(v=arrays(np.float64, N, elements=finite), s1=st.floats(0, 0.5), s2=st.floats(0, 0.5))
def test_gevrey_norm_monotone_in_sigma(v, s1, s2):
    g = GridSpec(N, 2 * math.pi)
    f = to_spectral(g, v)
    lo, hi = sorted((s1, s2))
    assert gevrey_norm(f, lo) <= gevrey_norm(f, hi) * (1 + 1e-12)


def test_gevrey_norm_of_single_mode():
    g = GridSpec(N, 2 * math.pi)
    f = to_spectral(g, np.cos(3 * g.x))
    want = math.sqrt(g.length * 2 * 0.25) * math.exp(0.3 * 3) * 4.0 ** 0.5
    assert gevrey_norm(f, GevreyParams(0.3, 0.5)) == pytest.approx(want, rel=1e-12)
    want_sqrt = math.sqrt(g.length * 0.5) * math.exp(0.3 * 3) * math.sqrt(10.0)
    assert gevrey_norm(f, 0.3, 1.0, bracket="sqrt") == pytest.approx(want_sqrt, rel=1e-12)


def test_gevrey_inverse_pair():
    g = GridSpec(N, 2 * math.pi)
    f = to_spectral(g, 1 / np.cosh(g.x))
    back = apply_gevrey(apply_gevrey(f, 0.2), -0.2)
    np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-15)


def test_exponent_cap():
    g = GridSpec(N, 2 * math.pi)
    f = to_spectral(g, np.cos(g.x))
    ok = EXPONENT_CAP / g.xi_max
    gevrey_norm(f, ok * 0.999)
    with pytest.raises(GevreyOverflowError):
        gevrey_norm(f, ok * 1.001)
    with pytest.raises(ValueError):
        GevreyParams(-0.1)


def test_trust_ignores_exact_zeros():
    g = GridSpec(1024, 2 * math.pi)
    c = np.where(np.abs(g.k) <= 16, 0.5 ** np.abs(g.k), 0.0)
    f = SpectralField(g, c, real=True)
    noisy = f.with_coeffs(np.where(c == 0, 1e-17, c))
    sigma = 60.0 / g.xi_max
    assert gevrey_trusted(f, sigma)
    assert not gevrey_trusted(noisy, sigma)


def test_dealias_mask_half_rule():
    g = GridSpec(N, 1.0)
    m = dealias_mask(g)
    assert m.sum() == N // 2 + 1
    assert m[N // 4] and not m[N // 4 + 1]


def test_derivative_of_sine():
    g = GridSpec(N, 2 * math.pi)
    f = to_spectral(g, np.sin(2 * g.x))
    np.testing.assert_allclose(to_physical(apply_derivative(f, 1)), 2 * np.cos(2 * g.x), atol=1e-12)
    np.testing.assert_allclose(to_physical(apply_derivative(f, 3)), -8 * np.cos(2 * g.x), atol=1e-11)
    with pytest.raises(ValueError):
        apply_derivative(f, 4)


def test_hermitian_check():
    g = GridSpec(8, 1.0)
    c = np.zeros(8, complex)
    c[1] = 1.0
    with pytest.raises(ValueError):
        SpectralField(g, c, real=True)
    c[7] = 1.0
    SpectralField(g, c, real=True)


def test_xsb_reduces_to_l2_for_zero_weights():
    g = GridSpec(16, 2 * math.pi)
    rng = np.random.default_rng(3)
    t = np.arange(32) * 0.1
    v = rng.normal(size=(32, 16)) + 1j * rng.normal(size=(32, 16))
    F = make_spacetime(g, t, v, "boxcar")
    l2 = math.sqrt(g.dx * F.dt * np.sum(np.abs(v) ** 2))
    assert xsb_norm(F, 0.0, 0.0, EquationSpec.tnls()) == pytest.approx(l2, rel=1e-12)


def test_xsb_free_wave_sits_on_characteristic():
    # a free solution has all its weight at tau = phi(xi), so b does not matter
    g = GridSpec(16, 2 * math.pi)
    eq = EquationSpec.tnls(0.0, 1.0, 1.0)
    m = 64
    T = 2 * math.pi
    t = np.arange(m) * T / m
    v = np.exp(1j * (2 * g.x[None, :] + eq.phase(2.0) * t[:, None]))
    F = make_spacetime(g, t, v, "boxcar")
    assert xsb_norm(F, 0.0, 0.4, eq) == pytest.approx(xsb_norm(F, 0.0, 0.0, eq), rel=1e-10)


def test_spacetime_validation():
    g = GridSpec(8, 1.0)
    with pytest.raises(ValueError):
        make_spacetime(g, np.arange(4), np.zeros((4, 8)))
    with pytest.raises(ValueError):
        make_spacetime(g, np.r_[0, 1, 2, 4, 5, 6, 7, 8], np.zeros((8, 8)))
    with pytest.raises(ValueError):
        make_spacetime(g, np.arange(8), np.zeros((8, 8)), "blackman")
    with pytest.raises(ValueError):
        xsb_norm(make_spacetime(g, np.arange(8), np.zeros((8, 8))), 0, 1.0, EquationSpec.mkdv())
