import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevreylab.equations import EquationSpec
from gevreylab.initial_data import (
    make_initial,
    plane_wave,
    poisson_kernel,
    random_band,
    sech,
    soliton,
)
from gevreylab.spectral import GridSpec, to_physical


@settings(max_examples=30)
@given(sigma0=st.floats(0.05, 1.5), amp=st.floats(0.1, 3.0))
def test_poisson_kernel_coefficients(sigma0, amp):
    g = GridSpec(128, 2 * math.pi)
    f = poisson_kernel(g, sigma0, amp)
    r = math.exp(-2 * math.pi * sigma0 / g.length)
    ak = np.abs(g.k)
    # sampling folds r^{|k + m n|} onto mode k
    want = amp * (r ** ak + r ** (g.n - ak)) / (1 - r ** g.n)
    want[g.unpaired] = amp * 2 * r ** (g.n // 2) / (1 - r ** g.n)
    np.testing.assert_allclose(f.coeffs, want, rtol=0, atol=1e-14 * amp)


def test_sech_and_soliton_are_even_and_real():
    g = GridSpec(256, 20 * math.pi)
    for f in (sech(g, 2.0, 0.5), soliton(g, 2.0)):
        assert f.real
        u = to_physical(f)
        np.testing.assert_allclose(u[1:], u[1:][::-1], atol=1e-14)
    with pytest.raises(ValueError):
        sech(g, 1.0, 0.0)
    with pytest.raises(ValueError):
        soliton(g, -1.0)


def test_plane_wave_needs_grid_mode():
    g = GridSpec(64, 4 * math.pi)
    plane_wave(g, 1.0, 0.5)
    with pytest.raises(ValueError, match="not a grid mode"):
        plane_wave(g, 1.0, 0.3)
    with pytest.raises(ValueError, match="band"):
        plane_wave(g, 1.0, 16.0)


@given(seed=st.integers(0, 2 ** 32 - 1), k_max=st.integers(1, 15))
@settings(max_examples=25)
def test_random_band_properties(seed, k_max):
    g = GridSpec(64, 2 * math.pi)
    f = random_band(g, k_max, seed, A=0.7)
    assert np.max(np.abs(to_physical(f))) == pytest.approx(0.7, rel=1e-12)
    assert np.all(f.coeffs[np.abs(g.k) > k_max] == 0)
    assert f.coeffs[0] == 0
    np.testing.assert_array_equal(random_band(g, k_max, seed, A=0.7).coeffs, f.coeffs)


def test_random_band_limits():
    g = GridSpec(64, 2 * math.pi)
    with pytest.raises(ValueError):
        random_band(g, 16)


def test_make_initial():
    g = GridSpec(64, 2 * math.pi)
    f = make_initial(g, EquationSpec.tnls(), "sech", {"A": 1.0})
    assert not f.real
    f = make_initial(g, EquationSpec.mkdv(), "random_band", {"k_max": 4.0, "seed": 2.0})
    assert f.real
    with pytest.raises(ValueError):
        make_initial(g, EquationSpec.mkdv(), "plane_wave", {})
    with pytest.raises(ValueError):
        make_initial(g, EquationSpec.mkdv(), "sech", {"k": 1.0})
    with pytest.raises(ValueError):
        make_initial(g, EquationSpec.mkdv(), "gaussian", {})
