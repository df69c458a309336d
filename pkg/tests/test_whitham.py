import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from ostwave.errors import BetaNonZero, BetaZero, DegenerateStokes
from ostwave.waves import ModelParams, modulation_flux, parameter_jet, refine, second_harmonic, solve_wave, stokes_seed
from ostwave.whitham import (
    Classification,
    WhithamMatrix,
    classify,
    critical_frequency,
    eigenvalues_2x2,
    omega0_derivatives,
    reduced_whitham_matrix,
    stokes_lighthill,
    stokes_lighthill_from_frequencies,
    stokes_whitham_eigenvalues,
    whitham_matrix,
)

from conftest import rel

K_C = (1 / (48 * np.pi**4)) ** 0.25


def test_lighthill_reduced_model_is_one_third():
    for k in (0.01, 0.3, 1.0, 7.0):
        assert stokes_lighthill(k, ModelParams(1.0, 0.0)) == 1 / 3


def test_lighthill_reference_value(params):
    assert stokes_lighthill(1.0, params) == pytest.approx(-0.24990, abs=1e-5)
    q = np.pi**4
    assert stokes_lighthill(1.0, params) == pytest.approx((1 - 48 * q) / (3 * (1 + 64 * q)), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(0.1, 10.0), st.floats(-10.0, 10.0))
def test_lighthill_matches_frequency_product(k, gamma, beta):
    p = ModelParams(gamma, beta)
    try:
        closed = stokes_lighthill(k, p)
    except DegenerateStokes:
        return
    if abs(gamma + 64 * beta * np.pi**4 * k**4) < 1e-6 * gamma:
        return
    assert closed == pytest.approx(stokes_lighthill_from_frequencies(k, p), rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 2.0))
def test_omega_derivatives_by_differencing(k):
    p = ModelParams(1.0, 1.0)
    h = 1e-5 * k
    w0 = lambda x: omega0_derivatives(x, p)[0]  # noqa: E731
    w1 = lambda x: omega0_derivatives(x, p)[1]  # noqa: E731
    _, d1, d2 = omega0_derivatives(k, p)
    assert (w0(k + h) - w0(k - h)) / (2 * h) == pytest.approx(d1, rel=1e-6, abs=1e-6)
    assert (w1(k + h) - w1(k - h)) / (2 * h) == pytest.approx(d2, rel=1e-6, abs=1e-6)


def test_critical_frequency_is_the_sign_change(params):
    root = scipy.optimize.brentq(stokes_lighthill, 0.05, 0.3, args=(params,), xtol=1e-15)
    assert root == pytest.approx(critical_frequency(params), abs=1e-12)
    assert root == pytest.approx(K_C, abs=1e-12)
    assert root == pytest.approx(0.1209316053, abs=1e-10)
    assert stokes_lighthill(0.9 * root, params) > 0 > stokes_lighthill(1.1 * root, params)


def test_critical_frequency_scaling():
    assert critical_frequency(ModelParams(16.0, 1.0)) == pytest.approx(2 * critical_frequency(ModelParams()), rel=1e-14)


def test_critical_frequency_needs_dispersion():
    with pytest.raises(BetaZero):
        critical_frequency(ModelParams(1.0, 0.0))


def test_lighthill_denominator_zero():
    p = ModelParams(1.0, -1.0)
    with pytest.raises(DegenerateStokes):
        stokes_lighthill((1 / (64 * np.pi**4)) ** 0.25, p)


@pytest.mark.parametrize(
    "entries, expected",
    [
        ([[2.0, 0.0], [0.0, 1.0]], Classification.STRICTLY_HYPERBOLIC),
        ([[0.0, -1.0], [1.0, 0.0]], Classification.ELLIPTIC),
        ([[3.0, 0.0], [0.0, 3.0]], Classification.DEGENERATE),
        ([[1.0, 1.0], [0.0, 1.0]], Classification.DEGENERATE),
    ],
)
def test_classify_examples(entries, expected):
    assert classify(np.array(entries), 1e-8) == expected


def test_classify_requires_positive_tol():
    with pytest.raises(ValueError):
        classify(np.eye(2), 0.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=4, max_size=4))
def test_classification_consistent_with_eigenvalues(vals):
    A = np.array(vals).reshape(2, 2)
    W = WhithamMatrix.from_entries(A)
    lam = W.eigenvalues
    ref = np.linalg.eigvals(A)
    assert np.allclose(sorted(lam, key=lambda z: (z.real, z.imag)), sorted(ref, key=lambda z: (z.real, z.imag)), atol=1e-6 * max(1, np.abs(A).max()))
    if W.classification == Classification.STRICTLY_HYPERBOLIC:
        assert np.all(lam.imag == 0) and lam[0] != lam[1]
    elif W.classification == Classification.ELLIPTIC:
        assert np.all(lam.imag != 0) and lam[0] == np.conj(lam[1])


def test_eigenvalues_avoid_cancellation():
    A = np.array([[1e8, 1.0], [0.0, 1e-8]])
    assert eigenvalues_2x2(A)[0] == pytest.approx(1e-8, rel=1e-12)


@pytest.mark.parametrize("k", [0.08, 0.1, 0.15, 0.2, 1.0])
def test_stokes_eigenvalue_law(k, params):
    a = 1e-2
    w = refine(stokes_seed(a, k, params))
    W = whitham_matrix(w, parameter_jet(w))
    pred = stokes_whitham_eigenvalues(a, k, params)
    # Compare the splitting and the centre separately: the centre is -omega0' + O(a^2).
    assert rel(W.eigenvalues, pred) <= 10 * a**2
    split = W.eigenvalues[1] - W.eigenvalues[0]
    split_pred = pred[1] - pred[0]
    assert abs(split - split_pred) <= 10 * a**2 * abs(split_pred) + 1e-12
    if k < K_C:
        assert np.all(W.eigenvalues.imag == 0)
    else:
        assert W.eigenvalues[0] == np.conj(W.eigenvalues[1]) and W.eigenvalues[0].imag != 0


def test_small_amplitude_limit_is_degenerate(params):
    """As a -> 0 the diagonal tends to -omega0'(k), W21 to 0 and W12 to -4 k A2.

    The limit is a Jordan block with the double eigenvalue -omega0'(k).
    """
    k = 0.3
    w1 = -omega0_derivatives(k, params)[1]
    devs = []
    for a in (1e-3, 5e-4):
        w = refine(stokes_seed(a, k, params))
        W = whitham_matrix(w, parameter_jet(w))
        devs.append(np.array([W.entries[0, 0] - w1, W.entries[1, 1] - w1, W.entries[1, 0]]))
        assert W.entries[0, 1] == pytest.approx(-4 * k * second_harmonic(k, params), rel=1e-5)
        assert W.classification == Classification.DEGENERATE
    # Each deviation is O(a^2): halving a divides it by four, and the extrapolated value vanishes.
    assert np.allclose(devs[0] / devs[1], 4, rtol=1e-3)
    assert np.all(np.abs((4 * devs[1] - devs[0]) / 3) <= 1e-6 * np.abs(devs[0]))


def test_whitham_matrix_matches_finite_differences(params):
    """W = [[-(kc)_k, -k c_P], [G_k, G_P]] rebuilt from solved neighbours."""
    k, P = 0.11, 0.3
    w = solve_wave(k, P, params)
    W = whitham_matrix(w, parameter_jet(w)).entries
    dk, dP = 1e-5 * k, 1e-5 * P
    kp, km = solve_wave(k + dk, P, params), solve_wave(k - dk, P, params)
    Pp, Pm = solve_wave(k, P + dP, params), solve_wave(k, P - dP, params)
    fd = np.array(
        [
            [-(kp.k * kp.c - km.k * km.c) / (2 * dk), -k * (Pp.c - Pm.c) / (2 * dP)],
            [(modulation_flux(kp) - modulation_flux(km)) / (2 * dk), (modulation_flux(Pp) - modulation_flux(Pm)) / (2 * dP)],
        ]
    )
    assert np.allclose(W, fd, rtol=1e-7, atol=1e-9)


def test_reduced_matrix_requires_beta_zero(hyperbolic_wave):
    with pytest.raises(BetaNonZero):
        reduced_whitham_matrix(hyperbolic_wave, parameter_jet(hyperbolic_wave))


@pytest.mark.parametrize("k", [0.05, 0.1, 0.15])
def test_reduced_model_is_hyperbolic(k):
    p = ModelParams(1.0, 0.0)
    for P in (1e-4, 1e-3):
        w = solve_wave(k, P, p)
        W = reduced_whitham_matrix(w, parameter_jet(w))
        assert W.classification == Classification.STRICTLY_HYPERBOLIC


def test_wave_ref_is_recorded(hyperbolic_wave):
    W = whitham_matrix(hyperbolic_wave, parameter_jet(hyperbolic_wave))
    w = hyperbolic_wave
    assert W.wave_ref == (1.0, 1.0, w.k, w.P, w.c)
    with pytest.raises(ValueError):
        W.entries[0, 0] = 0.0
