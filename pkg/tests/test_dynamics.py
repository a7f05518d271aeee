import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevreylab.diagnostics import mass
from gevreylab.dynamics import (
    IntegratorConfig,
    LifespanParams,
    NotContractive,
    NumericalBlowup,
    continuation_run,
    integrate,
    lifespan,
    linear_propagate,
    nonlinear_term,
    picard_solve,
    step,
    window_length,
)
from gevreylab.equations import EquationSpec
from gevreylab.initial_data import plane_wave, plane_wave_exact, random_band, sech
from gevreylab.spectral import GridSpec, SpectralField, to_physical


@settings(max_examples=30, deadline=None)
@given(t1=st.floats(-5, 5), t2=st.floats(-5, 5))
def test_linear_group_property(t1, t2):
    g = GridSpec(32, 2 * math.pi)
    f = random_band(g, 6, 1)
    for eq in (EquationSpec.mkdv(0), EquationSpec.tnls(1.0, -0.5, 0.0)):
        f0 = f if eq.real_valued else SpectralField(g, f.coeffs)
        a = linear_propagate(linear_propagate(f0, eq, t1), eq, t2)
        b = linear_propagate(f0, eq, t1 + t2)
        np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-12)
        assert mass(a) == pytest.approx(mass(f0), rel=1e-12)


def test_linear_equation_is_integrated_exactly():
    g = GridSpec(64, 2 * math.pi)
    eq = EquationSpec.mkdv(0)
    f = random_band(g, 8, 5)
    out = integrate(f, eq, IntegratorConfig(0.05), 1.3).final
    np.testing.assert_allclose(out.coeffs, linear_propagate(f, eq, 1.3).coeffs, atol=1e-14)


def test_plane_wave_short_run():
    g = GridSpec(64, 2 * math.pi)
    eq = EquationSpec.tnls()
    out = integrate(plane_wave(g, 1.0, 2.0), eq, IntegratorConfig(1e-3), 0.5).final
    err = np.max(np.abs(to_physical(out) - plane_wave_exact(g, eq, 1.0, 2.0, 0.5)))
    assert err < 1e-10


def test_trajectory_sampling():
    g = GridSpec(32, 2 * math.pi)
    tr = integrate(sech(g), EquationSpec.mkdv(), IntegratorConfig(0.01), 0.1, sample_every=3)
    np.testing.assert_allclose(tr.times, [0.0, 0.03, 0.06, 0.09, 0.1])
    assert len(tr.states) == 5
    assert integrate(sech(g), EquationSpec.mkdv(), IntegratorConfig(0.01), 0.0).times == [0.0]


def test_step_matches_integrate():
    g = GridSpec(32, 2 * math.pi)
    f = sech(g)
    eq = EquationSpec.mkdv(1)
    cfg = IntegratorConfig(0.01)
    np.testing.assert_array_equal(step(f, eq, cfg).coeffs, integrate(f, eq, cfg, 0.01).final.coeffs)


def test_nonlinear_term_of_plane_wave():
    g = GridSpec(32, 2 * math.pi)
    eq = EquationSpec.tnls(1.0, 1.0, 2.0)
    f = plane_wave(g, 0.5, 3.0)
    np.testing.assert_allclose(nonlinear_term(f, eq).coeffs, -2j * 0.25 * f.coeffs, atol=1e-15)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blowup_detected():
    g = GridSpec(64, 2 * math.pi)
    f = sech(g, 30.0, 0.3)
    with pytest.raises(NumericalBlowup):
        integrate(f, EquationSpec.mkdv(1), IntegratorConfig(0.5), 50.0)


def test_integrator_validation():
    g = GridSpec(32, 2 * math.pi)
    with pytest.raises(ValueError):
        IntegratorConfig(0.0)
    with pytest.raises(ValueError):
        integrate(SpectralField(g, sech(g).coeffs), EquationSpec.mkdv(), IntegratorConfig(0.1), 1.0)
    with pytest.raises(ValueError):
        integrate(sech(g), EquationSpec.mkdv(), IntegratorConfig(1e-3, max_steps=10), 1.0)


def test_picard_contracts_and_matches_rk4():
    g = GridSpec(64, 2 * math.pi)
    eq = EquationSpec.mkdv(-1)
    f = random_band(g, 4, 1, 0.5)
    p = picard_solve(f, eq, 0.05, 10, 129)
    assert p.distances[-1] < 1e-14 < p.distances[0]
    ref = integrate(f, eq, IntegratorConfig(1e-4), 0.05).final
    np.testing.assert_allclose(p.final, ref.coeffs, atol=1e-10)


def test_picard_outside_contraction():
    g = GridSpec(64, 2 * math.pi)
    with pytest.raises(NotContractive):
        picard_solve(sech(g, 20.0, 0.3), EquationSpec.mkdv(1), 2.0, 8, 16)
    with pytest.raises(ValueError):
        picard_solve(sech(g), EquationSpec.mkdv(), 0.1, 0, 16)


@given(norm=st.floats(0, 1e3), c0=st.floats(0.01, 10), a=st.floats(1.01, 4))
def test_lifespan_formula(norm, c0, a):
    p = LifespanParams(c0, a)
    assert lifespan(norm, p) == pytest.approx(c0 / (1 + norm * norm) ** a, rel=1e-12)
    assert lifespan(norm, p) <= c0
    assert window_length(norm, p) == pytest.approx(c0 / (1 + 2 * norm) ** a, rel=1e-12)


def test_lifespan_validation():
    with pytest.raises(ValueError):
        lifespan(-1.0, LifespanParams())
    with pytest.raises(ValueError):
        LifespanParams(1.0, 1.0)


def test_continuation_schedule_follows_power_law():
    g = GridSpec(128, 8 * math.pi)
    eq = EquationSpec.mkdv(-1)
    res = continuation_run(sech(g, 1.0, 0.5), eq, 0.3, 4.0, IntegratorConfig(5e-3),
                           LifespanParams(1.0, 1.1), constant=0.05)
    assert res.status == "completed"
    red = res.schedule[:-1]
    assert len(red) > 5
    # after each reduction n * F * C * sigma^ell * B = 1 holds exactly
    prod = np.array([n * s ** 0.75 for _, s, n in red])
    np.testing.assert_allclose(prod, prod[0], rtol=1e-12)
    sigmas = [s for _, s, _ in res.schedule]
    assert all(b <= a for a, b in zip(sigmas, sigmas[1:]))
    assert res.schedule[-1][0] == 4.0


def test_continuation_rejects_focusing():
    g = GridSpec(64, 2 * math.pi)
    with pytest.raises(ValueError):
        continuation_run(sech(g), EquationSpec.mkdv(1), 0.1, 1.0, IntegratorConfig(0.01))
