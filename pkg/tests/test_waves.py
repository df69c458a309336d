import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ostwave.errors import ContinuationStalled, DegenerateStokes, NoConvergence, SingularJacobian
from ostwave.spectral import PeriodicGrid, SpectralField, inner
from ostwave.waves import (
    ModelParams,
    StokesExpansion,
    TravelingWave,
    continue_family,
    finite_difference_jet,
    hamiltonian,
    linear_speed,
    modulation_flux,
    momentum,
    parameter_jet,
    profile_residual,
    refine,
    second_harmonic,
    solve_wave,
    stokes_seed,
)

from conftest import rel


def stokes_error(a, k, params):
    w = refine(stokes_seed(a, k, params))
    s = StokesExpansion.at(a, k, params)
    expansion = SpectralField.from_cosines(w.grid, [a, 2 * a**2 * s.A2])
    # refine keeps the momentum of the seed, so both profiles belong to the same amplitude a.
    return np.max(np.abs(w.phi.values() - expansion.values())), w


def test_stokes_expansion_is_second_order_accurate(params):
    e1, _ = stokes_error(1e-2, 1.0, params)
    e2, _ = stokes_error(5e-3, 1.0, params)
    assert 6.5 <= e1 / e2 <= 9.5
    assert e1 <= 10 * (1e-2) ** 3


def test_stokes_speed_correction(params):
    # Exact speed minus the two-term expansion is O(a^4) at fixed momentum.
    errs = []
    for a in (0.4, 0.2):
        w = refine(stokes_seed(a, 1.0, params), tol=1e-13)
        amp = w.amplitude
        errs.append(abs(w.c - StokesExpansion.at(amp, 1.0, params).speed))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)


def test_second_harmonic_closed_form(params):
    k = 0.7
    A2 = second_harmonic(k, params)
    assert A2 == pytest.approx(2 * k**2 * np.pi**2 / (3 * (1 + 64 * k**4 * np.pi**4)), rel=1e-15)


@pytest.mark.parametrize("k", [0.05, 0.3, 1.0, 2.0])
def test_linear_speed_is_dispersion_relation(k, params):
    # omega(kappa) = gamma/kappa - beta kappa^3 with kappa = 2 pi k, c = omega/kappa.
    kappa = 2 * np.pi * k
    assert linear_speed(k, params) == pytest.approx(1 / kappa**2 - kappa**2, rel=1e-14)


def test_wave_invariants(any_wave):
    w = any_wave
    assert abs(w.phi.mean) <= 1e-12
    assert w.phi.is_even(1e-12)
    assert w.residual_norm <= 1e-10
    assert momentum(w.phi) == pytest.approx(w.P, abs=1e-10)
    res = profile_residual(w)
    assert np.max(np.abs(res.coeffs)) <= 1e-9


def test_refine_fixed_point(hyperbolic_wave):
    again = refine(hyperbolic_wave)
    assert again.iterations <= 1
    assert np.allclose(again.phi.coeffs, hyperbolic_wave.phi.coeffs, atol=1e-12)
    assert again.c == pytest.approx(hyperbolic_wave.c, abs=1e-12)


def test_refine_rejects_nonpositive(hyperbolic_wave):
    with pytest.raises(ValueError):
        refine(hyperbolic_wave, P=0.0)


def test_refine_reports_no_convergence(params):
    guess = stokes_seed(1e-2, 0.1, params)
    with pytest.raises(NoConvergence) as info:
        refine(guess, P=0.5, maxiter=1)
    assert info.value.iterations == 1


def test_beta_negative_resonance(params):
    p = ModelParams(1.0, -1.0)
    k_res = (1.0 / (64 * np.pi**4)) ** 0.25
    with pytest.raises(DegenerateStokes):
        second_harmonic(k_res, p)
    with pytest.raises(DegenerateStokes):
        stokes_seed(1e-3, k_res, p)
    near = stokes_seed(1e-3, k_res * 1.01, p)
    with pytest.raises((DegenerateStokes, SingularJacobian)):
        refine(near, k=k_res)


def test_higher_harmonic_resonance_detected():
    p = ModelParams(1.0, -1.0)
    # gamma + 9 beta (2 pi k)^4 = 0 puts harmonic 3 in resonance.
    k3 = (1.0 / (9 * (2 * np.pi) ** 4)) ** 0.25
    assert p.resonant_mode(k3, 64) == 3
    with pytest.raises(DegenerateStokes):
        stokes_seed(1e-3, k3, p)


def test_jet_matches_finite_differences(any_wave):
    jet = parameter_jet(any_wave)
    fd = finite_difference_jet(any_wave)
    assert jet.c_k == pytest.approx(fd.c_k, rel=1e-6)
    assert jet.c_P == pytest.approx(fd.c_P, rel=1e-6)
    assert rel(jet.phi_P.coeffs, fd.phi_P.coeffs) <= 1e-6
    assert rel(jet.phi_k.coeffs, fd.phi_k.coeffs) <= 1e-6
    assert not jet.degenerate


def test_jet_orthogonality(any_wave):
    jet = parameter_jet(any_wave)
    assert inner(any_wave.phi, jet.phi_k) == pytest.approx(0, abs=1e-10)
    assert inner(any_wave.phi, jet.phi_P) == pytest.approx(1, abs=1e-10)


def test_hamiltonian_derivative_is_speed(params):
    """Travelling waves are critical points of H - cP, so dH/dP at fixed k equals c."""
    k, P, h = 0.1, 0.03, 3e-6
    w = solve_wave(k, P, params)
    dH = (hamiltonian(solve_wave(k, P + h, params)) - hamiltonian(solve_wave(k, P - h, params))) / (2 * h)
    assert dH == pytest.approx(w.c, rel=1e-8)


def test_functionals_vanish_on_zero_profile(params):
    grid = PeriodicGrid.for_modes(8)
    w = TravelingWave(params, 0.5, 0.0, linear_speed(0.5, params), SpectralField.zeros(grid), 0.0)
    assert hamiltonian(w) == 0
    assert modulation_flux(w) == 0


def test_continuation_chain_is_monotone(params):
    start = refine(stokes_seed(0.05, 0.1, params))
    chain = continue_family(start, 0.1, 0.5, steps=4)
    Ps = [w.P for w in chain]
    assert Ps[0] == start.P and Ps[-1] == pytest.approx(0.5, rel=1e-14)
    assert np.all(np.diff(Ps) > 0)
    assert all(w.residual_norm <= 1e-10 for w in chain[1:])


def test_continuation_to_start_is_trivial(hyperbolic_wave):
    assert continue_family(hyperbolic_wave, hyperbolic_wave.k, hyperbolic_wave.P) == [hyperbolic_wave]


def test_continuation_stalls_past_limiting_wave():
    """At beta = 0 smooth waves cease to exist once the crest reaches the speed."""
    p = ModelParams(1.0, 0.0)
    start = refine(stokes_seed(1e-3, 0.5, p, PeriodicGrid.for_modes(32)))
    with pytest.raises(ContinuationStalled) as info:
        continue_family(start, 0.5, 0.05, steps=2)
    assert info.value.last_good.P < 0.05


@pytest.mark.parametrize("k", [0.1, 0.2])
def test_reduced_model_solves(k):
    p = ModelParams(1.0, 0.0)
    w = solve_wave(k, 1e-3, p)
    assert w.residual_norm <= 1e-10
    assert w.phi.is_even()


@settings(max_examples=8, deadline=None)
@given(st.floats(0.06, 0.3), st.floats(1e-4, 1e-2))
def test_solve_wave_hits_requested_point(k, P):
    w = solve_wave(k, P, ModelParams(), PeriodicGrid.for_modes(32))
    assert w.k == k
    assert momentum(w.phi) == pytest.approx(P, abs=1e-10)
    assert w.residual_norm <= 1e-10


def test_json_round_trip(hyperbolic_wave):
    back = TravelingWave.from_json(hyperbolic_wave.to_json())
    assert back.c == hyperbolic_wave.c and back.P == hyperbolic_wave.P
    assert np.array_equal(back.phi.coeffs, hyperbolic_wave.phi.coeffs)


def test_gamma_must_be_positive():
    with pytest.raises(ValueError):
        ModelParams(0.0, 1.0)
