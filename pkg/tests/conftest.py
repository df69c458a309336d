import warnings

import numpy as np
import pytest

from ostwave.spectral import PeriodicGrid, SpectralField
from ostwave.waves import ModelParams, TravelingWave, linear_speed, parameter_jet, refine, solve_wave, stokes_seed

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return ModelParams(1.0, 1.0)


@pytest.fixture(scope="session")
def stokes_wave(params):
    """Small-amplitude wave at k = 1, on the elliptic side of k_c."""
    return refine(stokes_seed(1e-2, 1.0, params))


@pytest.fixture(scope="session")
def hyperbolic_wave(params):
    return solve_wave(0.085, 0.03, params)


@pytest.fixture(scope="session")
def elliptic_wave(params):
    return solve_wave(0.16, 0.03, params)


@pytest.fixture(scope="session")
def large_wave(params):
    return solve_wave(0.11, 1.0, params)


@pytest.fixture(scope="session", params=["hyperbolic", "elliptic", "large"])
def any_wave(request, hyperbolic_wave, elliptic_wave, large_wave):
    return {"hyperbolic": hyperbolic_wave, "elliptic": elliptic_wave, "large": large_wave}[request.param]


@pytest.fixture(scope="session")
def jets(hyperbolic_wave, elliptic_wave, large_wave, stokes_wave):
    return {id(w): parameter_jet(w) for w in (hyperbolic_wave, elliptic_wave, large_wave, stokes_wave)}


def zero_wave(k, params, n_modes=16):
    """The phi = 0 member of the family, travelling at the linear speed."""
    grid = PeriodicGrid.for_modes(n_modes)
    return TravelingWave(params, k, 0.0, linear_speed(k, params), SpectralField.zeros(grid), 0.0)


@pytest.fixture(autouse=True)
def _quiet_stokes_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="seed amplitude")
        yield


def rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(np.max(np.abs(np.asarray(b))), 1e-300))
