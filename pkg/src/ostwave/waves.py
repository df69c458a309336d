"""Periodic traveling waves of the Ostrovsky equation.

Profiles are 1-periodic in theta = k (x - c t) and solve

    k^2 (-c phi' + phi phi' + beta k^2 phi''')' = gamma phi.

Only even, mean-zero profiles are represented: the unknowns are the real
coefficients b_n = phi_hat(n) = phi_hat(-n), n = 1..N, plus the speed c, and
the momentum constraint sum_n b_n^2 = P closes the system.  All functionals
(P, H, G) are integrals over one theta-period.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    ContinuationStalled,
    DegenerateStokes,
    NoConvergence,
    OstwaveError,
    SingularJacobian,
)
from .spectral import (
    PeriodicGrid,
    SpectralField,
    antiderivative,
    differentiate,
    inner,
    multiply,
)

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
NEWTON_MAXITER = 50
SINGULAR_RCOND = 1e-13
RESONANCE_RTOL = 1e-9
MIN_HOMOTOPY_STEP = 2.0**-10


@dataclass(frozen=True)
class ModelParams:
    """Constants of (u_t + u u_x + beta u_xxx)_x = gamma u."""

    gamma: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def resonant_mode(self, k: float, n_modes: int) -> int | None:
        """First harmonic n >= 2 with gamma + n^2 beta (2 pi k)^4 = 0, if any.

        Only possible for beta < 0.  The linearization about the zero
        profile then has a multiple kernel and the Stokes branch is not
        well defined.
        """
        if self.beta >= 0:
            return None
        q4 = (2 * np.pi * k) ** 4
        for n in range(2, n_modes + 1):
            term = n * n * self.beta * q4
            if abs(self.gamma + term) <= RESONANCE_RTOL * max(self.gamma, abs(term)):
                return n
        return None


@dataclass(frozen=True)
class TravelingWave:
    params: ModelParams
    k: float
    P: float
    c: float
    phi: SpectralField
    residual_norm: float
    approximate: bool = False
    iterations: int = 0

    @property
    def grid(self) -> PeriodicGrid:
        return self.phi.grid

    @property
    def amplitude(self) -> float:
        """Coefficient of cos(2 pi theta)."""
        return 2 * self.phi.coeff(1).real

    def to_json(self) -> dict:
        return {
            "gamma": self.params.gamma,
            "beta": self.params.beta,
            "k": self.k,
            "P": self.P,
            "c": self.c,
            "residual_norm": self.residual_norm,
            "phi": self.phi.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TravelingWave":
        return cls(
            params=ModelParams(float(data["gamma"]), float(data["beta"])),
            k=float(data["k"]),
            P=float(data["P"]),
            c=float(data["c"]),
            phi=SpectralField.from_json(data["phi"]),
            residual_norm=float(data["residual_norm"]),
        )


@dataclass(frozen=True)
class WaveJet:
    """First derivatives of (phi, c) with respect to (k, P) at fixed momentum/frequency."""

    phi_k: SpectralField
    phi_P: SpectralField
    c_k: float
    c_P: float
    degenerate: bool = False


@dataclass(frozen=True)
class StokesExpansion:
    a: float
    k: float
    A2: float
    omega0: float
    omega2: float
    params: ModelParams = field(default_factory=ModelParams)

    @classmethod
    def at(cls, a: float, k: float, params: ModelParams) -> "StokesExpansion":
        A2 = second_harmonic(k, params)
        return cls(a=a, k=k, A2=A2, omega0=k * linear_speed(k, params), omega2=k * A2, params=params)

    @property
    def speed(self) -> float:
        return self.omega0 / self.k + self.a**2 * self.A2


def linear_speed(k: float, params: ModelParams) -> float:
    """Phase speed of the linear mode cos(2 pi theta)."""
    return params.gamma / (4 * np.pi**2 * k**2) - 4 * params.beta * np.pi**2 * k**2


def second_harmonic(k: float, params: ModelParams) -> float:
    denom = 3 * (params.gamma + 64 * params.beta * k**4 * np.pi**4)
    if abs(denom) <= RESONANCE_RTOL * 3 * max(params.gamma, abs(64 * params.beta * k**4 * np.pi**4)):
        raise DegenerateStokes(f"gamma + 64 beta pi^4 k^4 = 0 at k={k:.12g}")
    return 2 * k**2 * np.pi**2 / denom


def stokes_seed(a: float, k: float, params: ModelParams, grid: PeriodicGrid | None = None) -> TravelingWave:
    """Two-term Stokes approximation a cos(2 pi theta) + 2 a^2 A2 cos(4 pi theta)."""
    grid = grid or PeriodicGrid()
    A2 = second_harmonic(k, params)
    n = params.resonant_mode(k, grid.n_modes)
    if n is not None:
        raise DegenerateStokes(f"harmonic {n} is resonant at k={k:.12g}")
    c0 = linear_speed(k, params)
    if abs(a) > 0.2 * max(abs(c0), 1e-300):
        warnings.warn(f"seed amplitude {a} is not small relative to the linear speed {c0:.4g}", stacklevel=2)
    phi = SpectralField.from_cosines(grid, [a, 2 * a**2 * A2])
    wave = TravelingWave(params, k, 0.5 * inner(phi, phi), c0 + a**2 * A2, phi, np.nan, approximate=True)
    return _with_residual(wave)


# -- discrete profile system ----------------------------------------------------


def _symbols(N: int):
    q2 = (2 * np.pi * np.arange(1, N + 1)) ** 2
    return q2, q2 * q2


def _half_coeffs(phi: SpectralField) -> np.ndarray:
    return phi.coeffs[phi.grid.n_modes + 1 :].real.copy()


def _full_from_half(b: np.ndarray) -> np.ndarray:
    return np.concatenate([b[::-1], [0.0], b])


def _square_coeffs(b: np.ndarray) -> np.ndarray:
    """Modes 1..N of phi^2 by exact convolution of the coefficient vectors.

    Direct convolution keeps the error of each output mode relative to its
    own size, which matters once high modes are multiplied by (2 pi n)^4.
    """
    full = _full_from_half(b)
    N = b.size
    return np.convolve(full, full)[2 * N + 1 : 3 * N + 1]


def _residual_half(b: np.ndarray, c: float, k: float, params: ModelParams) -> np.ndarray:
    q2, q4 = _symbols(b.size)
    s = _square_coeffs(b)
    return k**2 * (c * q2 * b - 0.5 * q2 * s + params.beta * k**2 * q4 * b) - params.gamma * b


def _dresidual_dk(b: np.ndarray, c: float, k: float, params: ModelParams) -> np.ndarray:
    q2, q4 = _symbols(b.size)
    s = _square_coeffs(b)
    return 2 * k * (c * q2 * b - 0.5 * q2 * s) + 4 * params.beta * k**3 * q4 * b


def _jacobian(b: np.ndarray, c: float, k: float, params: ModelParams) -> np.ndarray:
    """Jacobian of (profile residual, momentum constraint) in (b_1..b_N, c)."""
    N = b.size
    q2, q4 = _symbols(N)
    full = _full_from_half(b)

    def coeff(j):
        j = np.abs(j)
        out = np.zeros(j.shape)
        ok = j <= N
        out[ok] = full[N + j[ok]]
        return out

    n = np.arange(1, N + 1)[:, None]
    m = np.arange(1, N + 1)[None, :]
    ds = 2 * (coeff(n - m) + coeff(n + m))
    J = np.zeros((N + 1, N + 1))
    J[:N, :N] = -0.5 * k**2 * q2[:, None] * ds
    J[np.arange(N), np.arange(N)] += k**2 * (c * q2 + params.beta * k**2 * q4) - params.gamma
    J[:N, N] = k**2 * q2 * b
    J[N, :N] = 2 * b
    return J


class _Factored:
    """Row-equilibrated LU factorization of the bordered Jacobian."""

    def __init__(self, J: np.ndarray):
        scale = np.max(np.abs(J), axis=1)
        scale[scale == 0] = 1.0
        self.scale = scale
        Js = J / scale[:, None]
        self.lu = scipy.linalg.lu_factor(Js, check_finite=True)
        rcond = 1.0 / np.linalg.cond(Js)
        if not rcond > SINGULAR_RCOND:
            raise SingularJacobian(f"profile Jacobian reciprocal condition {rcond:.2e}")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(self.lu, rhs / self.scale)


def profile_residual(w: TravelingWave) -> SpectralField:
    """k^2(-c phi' + phi phi' + beta k^2 phi''')' - gamma phi, dealiased."""
    phi = w.phi
    k, beta, gamma = w.k, w.params.beta, w.params.gamma
    d1 = differentiate(phi, 1)
    flux = -w.c * d1 + multiply(phi, d1) + beta * k**2 * differentiate(phi, 3)
    return k**2 * differentiate(flux, 1) - gamma * phi


def _residual_norm(b, c, k, params, P) -> float:
    r = _residual_half(b, c, k, params)
    return float(max(np.max(np.abs(r), initial=0.0), abs(np.sum(b * b) - P)))


def _with_residual(w: TravelingWave) -> TravelingWave:
    b = _half_coeffs(w.phi)
    r = float(np.max(np.abs(_residual_half(b, w.c, w.k, w.params)), initial=0.0))
    return TravelingWave(w.params, w.k, w.P, w.c, w.phi, r, w.approximate, w.iterations)


def refine(
    guess: TravelingWave,
    k: float | None = None,
    P: float | None = None,
    *,
    tol: float = NEWTON_TOL,
    maxiter: int = NEWTON_MAXITER,
) -> TravelingWave:
    """Newton iteration for the even profile with frequency k and momentum P."""
    k = guess.k if k is None else float(k)
    P = guess.P if P is None else float(P)
    params = guess.params
    grid = guess.grid
    if k <= 0 or P <= 0:
        raise ValueError("k and P must be positive")
    n = params.resonant_mode(k, grid.n_modes)
    if n is not None:
        raise DegenerateStokes(f"harmonic {n} is resonant at k={k:.12g}")

    b = _half_coeffs(guess.phi)
    c = float(guess.c)
    res = _residual_norm(b, c, k, params, P)
    it = 0
    while res > tol:
        if it >= maxiter:
            raise NoConvergence(it, res)
        F = np.append(_residual_half(b, c, k, params), np.sum(b * b) - P)
        step = _Factored(_jacobian(b, c, k, params)).solve(-F)
        b = b + step[:-1]
        c = c + step[-1]
        it += 1
        new_res = _residual_norm(b, c, k, params, P)
        if not np.isfinite(new_res):
            raise NoConvergence(it, new_res)
        if new_res > tol and np.max(np.abs(step)) <= 1e-15 * max(1.0, np.max(np.abs(b)), abs(c)):
            # Stagnated at round-off above the requested tolerance.
            raise NoConvergence(it, new_res)
        res = new_res
    log.debug("refine k=%.6g P=%.6g converged in %d steps, residual %.2e", k, P, it, res)
    phi = SpectralField(grid, _full_from_half(b))
    if params.beta == 0 and np.max(phi.values()) >= c:
        # The reduced profile equation k^2((c - phi) phi')' + ... is singular where phi = c.
        raise SingularJacobian(f"profile crest reaches the wave speed c={c:.6g}; no smooth wave")
    return TravelingWave(params, k, P, c, phi, float(np.max(np.abs(_residual_half(b, c, k, params)), initial=0.0)), False, it)


def parameter_jet(w: TravelingWave) -> WaveJet:
    """(phi_k, phi_P, c_k, c_P) from the bordered Jacobian at the converged wave."""
    b = _half_coeffs(w.phi)
    fac = _Factored(_jacobian(b, w.c, w.k, w.params))
    N = b.size
    rhs_P = np.zeros(N + 1)
    rhs_P[N] = 1.0
    dP = fac.solve(rhs_P)
    rhs_k = np.append(-_dresidual_dk(b, w.c, w.k, w.params), 0.0)
    dk = fac.solve(rhs_k)
    grid = w.grid
    c_P = float(dP[N])
    degenerate = abs(c_P) <= 1e-10 * max(1.0, abs(w.c) / max(w.P, 1e-300))
    return WaveJet(
        phi_k=SpectralField(grid, _full_from_half(dk[:N])),
        phi_P=SpectralField(grid, _full_from_half(dP[:N])),
        c_k=float(dk[N]),
        c_P=c_P,
        degenerate=degenerate,
    )


def finite_difference_jet(w: TravelingWave, rel_step: float = 1e-4) -> WaveJet:
    """Central differences of refine() over (k, P); an independent check on parameter_jet."""
    dk = rel_step * w.k
    dP = rel_step * w.P
    kp, km = refine(w, w.k + dk, w.P), refine(w, w.k - dk, w.P)
    Pp, Pm = refine(w, w.k, w.P + dP), refine(w, w.k, w.P - dP)
    return WaveJet(
        phi_k=(kp.phi - km.phi) / (2 * dk),
        phi_P=(Pp.phi - Pm.phi) / (2 * dP),
        c_k=(kp.c - km.c) / (2 * dk),
        c_P=(Pp.c - Pm.c) / (2 * dP),
    )


def _predict(w: TravelingWave, k: float, P: float) -> TravelingWave:
    try:
        jet = parameter_jet(w)
    except OstwaveError:
        return w
    dk, dP = k - w.k, P - w.P
    phi = w.phi + dk * jet.phi_k + dP * jet.phi_P
    return TravelingWave(w.params, k, P, w.c + dk * jet.c_k + dP * jet.c_P, phi, np.nan, True)


def continue_family(
    start: TravelingWave,
    target_k: float,
    target_P: float,
    steps: int = 8,
    *,
    tol: float = NEWTON_TOL,
) -> list[TravelingWave]:
    """Natural-parameter continuation along the straight line from (k0, P0) to the target.

    Steps are halved on Newton failure down to 2^-10 of the full homotopy.
    Returns the full chain, starting with ``start``.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    k0, P0 = start.k, start.P
    if np.isclose(target_k, k0, rtol=1e-14, atol=0) and np.isclose(target_P, P0, rtol=1e-14, atol=0):
        return [start]
    chain = [start]
    s, h = 0.0, 1.0 / steps
    current = start
    while s < 1.0:
        h = min(h, 1.0 - s)
        s_next = 1.0 if s + h >= 1.0 - 1e-14 else s + h
        k = k0 + s_next * (target_k - k0)
        P = P0 + s_next * (target_P - P0)
        try:
            wave = refine(_predict(current, k, P), k, P, tol=tol)
        except OstwaveError as exc:
            h /= 2
            if h < MIN_HOMOTOPY_STEP:
                raise ContinuationStalled(len(chain), current, str(exc)) from exc
            continue
        chain.append(wave)
        current, s = wave, s_next
    return chain


def solve_wave(
    k: float,
    P: float,
    params: ModelParams,
    grid: PeriodicGrid | None = None,
    *,
    seed_amplitude: float | None = None,
    steps: int = 8,
    tol: float = NEWTON_TOL,
) -> TravelingWave:
    """Stokes seed, then continuation in momentum up to P, then a final refine."""
    grid = grid or PeriodicGrid()
    a_target = 2 * np.sqrt(P)
    if seed_amplitude is None:
        # Stay in the regime where the Stokes seed is accurate; continuation does the rest.
        a = min(a_target, max(0.1 * abs(linear_speed(k, params)), 1e-3))
    else:
        a = min(abs(seed_amplitude), a_target)
    seed = refine(stokes_seed(a, k, params, grid), k, None, tol=tol)
    if np.isclose(seed.P, P, rtol=1e-13, atol=0):
        return seed
    return continue_family(seed, k, P, steps, tol=tol)[-1]


# -- conserved functionals --------------------------------------------------------


def _cube_integral(phi: SpectralField) -> float:
    return inner(multiply(phi, phi), phi)


def hamiltonian(w: TravelingWave) -> float:
    """Integral over one theta-period of phi^3/6 + gamma/(2k^2) (d^-1 phi)^2 - beta k^2/2 (phi')^2."""
    phi, k = w.phi, w.k
    d1 = differentiate(phi, 1)
    anti = antiderivative(phi, 1)
    return (
        _cube_integral(phi) / 6
        + w.params.gamma / (2 * k**2) * inner(anti, anti)
        - w.params.beta * k**2 / 2 * inner(d1, d1)
    )


def modulation_flux(w: TravelingWave) -> float:
    """Flux of the averaged momentum law: integral of -phi^3/3 + 3/2 beta k^2 (phi')^2 + gamma/(2k^2) (d^-1 phi)^2."""
    phi, k = w.phi, w.k
    d1 = differentiate(phi, 1)
    anti = antiderivative(phi, 1)
    return (
        -_cube_integral(phi) / 3
        + 1.5 * w.params.beta * k**2 * inner(d1, d1)
        + w.params.gamma / (2 * k**2) * inner(anti, anti)
    )


def momentum(phi: SpectralField) -> float:
    return 0.5 * inner(phi, phi)
