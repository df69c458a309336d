"""Bloch operator pencil, generalized kernel, modulation matrix M0 and Evans cross-check.

The Bloch problem is  L_xi w = lambda H_xi w  on 1-periodic w, with

    L_xi = gamma + k^2 (d + i xi)^2 (c - phi - beta k^2 (d + i xi)^2),
    H_xi = k (d + i xi),

discretized by Hill's method on modes -N..N.  xi is in radians per unit
theta, so H_xi is diagonal with entries i k (2 pi n + xi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import (
    NormalizationViolated,
    StiffIntegrationFailure,
    WaveMismatch,
    WindowAmbiguous,
    XiZeroDeflationFailed,
)
from .spectral import (
    PeriodicGrid,
    SpectralField,
    antiderivative,
    as_vector,
    differentiate,
    inner,
    multiply,
    toeplitz_of,
)
from .waves import TravelingWave, WaveJet
from .whitham import Classification, WhithamMatrix, classify_entries, eigenvalues_2x2

GRAM_TOL = 1e-8
XI_ZERO = 1e-14


@dataclass(frozen=True)
class BlochMatrices:
    xi: float
    L: np.ndarray
    H: np.ndarray
    n_modes: int
    k: float

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.n_modes, self.n_modes + 1)


def assemble_bloch(w: TravelingWave, xi: float, N: int | None = None) -> BlochMatrices:
    if abs(xi) > np.pi:
        raise ValueError("xi must lie in [-pi, pi]")
    N = w.grid.n_modes if N is None else int(N)
    phi = w.phi if N == w.grid.n_modes else w.phi.resample(PeriodicGrid.for_modes(N))
    k, c = w.k, w.c
    beta, gamma = w.params.beta, w.params.gamma
    q = 2 * np.pi * np.arange(-N, N + 1) + xi
    D2 = -(q**2)
    T = toeplitz_of(phi)
    if np.max(np.abs(T.imag), initial=0.0) == 0.0:
        T = T.real
    inner_op = -T
    inner_op[np.diag_indices_from(inner_op)] += c - beta * k**2 * D2
    L = k**2 * D2[:, None] * inner_op
    L[np.diag_indices_from(L)] += gamma
    H = np.diag(1j * k * q)
    return BlochMatrices(float(xi), L, H, N, k)


def pencil_eigs(m: BlochMatrices, window_radius: float | None = None) -> np.ndarray:
    """Finite eigenvalues of L w = lambda H w, sorted by modulus.

    H = i K with K real diagonal, so lambda = -i nu with nu the eigenvalues
    of K^-1 L.  For even profiles K^-1 L is real, which makes the reflection
    symmetry lambda -> -conj(lambda) exact in floating point.  At xi = 0 the
    mean mode (where H vanishes) is deflated: its row of L reduces to
    gamma w_0 = 0, so it carries no finite eigenvalue.
    """
    K = m.k * (2 * np.pi * m.modes + m.xi)
    L = m.L
    if abs(m.xi) <= XI_ZERO:
        N = m.n_modes
        row = np.delete(L[N], N)
        scale = max(1.0, float(np.max(np.abs(L))))
        if np.max(np.abs(row), initial=0.0) > 1e-12 * scale or abs(L[N, N]) <= 1e-12 * scale:
            raise XiZeroDeflationFailed("mean-mode row of L is not gamma * e_0")
        keep = np.arange(L.shape[0]) != N
        L = L[np.ix_(keep, keep)]
        K = K[keep]
    A = L / K[:, None]
    nu = scipy.linalg.eigvals(A.real if np.isrealobj(A) else A)
    lam = -1j * nu
    lam = lam[np.argsort(np.abs(lam), kind="stable")]
    if window_radius is not None:
        if window_radius <= 0:
            raise ValueError("window_radius must be positive")
        lam = lam[np.abs(lam) < window_radius]
    return lam


# -- generalized kernel and M0 ----------------------------------------------------------


@dataclass(frozen=True)
class KernelBasis:
    Phi1: SpectralField
    Phi2: SpectralField
    Psi1: SpectralField
    Psi2: SpectralField
    gram: np.ndarray


def gram_matrix(Phi: list[SpectralField], Psi: list[SpectralField]) -> np.ndarray:
    return np.array([[inner(psi, differentiate(ph, 1)) for ph in Phi] for psi in Psi])


def kernel_basis(w: TravelingWave, jet: WaveJet, tol: float = GRAM_TOL) -> KernelBasis:
    Phi1 = differentiate(w.phi, 1)
    Phi2 = jet.phi_P
    Psi1 = antiderivative(jet.phi_P, 2)
    Psi2 = -antiderivative(w.phi, 1)
    gram = gram_matrix([Phi1, Phi2], [Psi1, Psi2])
    if np.max(np.abs(gram - np.eye(2))) > tol:
        raise NormalizationViolated(gram)
    return KernelBasis(Phi1, Phi2, Psi1, Psi2, gram)


def apply_L1(w: TravelingWave, f: SpectralField) -> SpectralField:
    """2k d((c - phi) f) - 4 beta k^3 f'''."""
    k = w.k
    cf = w.c * f - multiply(w.phi, f)
    return 2 * k * differentiate(cf, 1) - 4 * w.params.beta * k**3 * differentiate(f, 3)


def apply_L2(w: TravelingWave, f: SpectralField) -> SpectralField:
    """(c - phi) f - 6 beta k^2 f''."""
    return w.c * f - multiply(w.phi, f) - 6 * w.params.beta * w.k**2 * differentiate(f, 2)


@dataclass(frozen=True)
class ModulationMatrix:
    entries: np.ndarray
    mu: np.ndarray
    classification: Classification
    discriminant: float
    wave_ref: tuple


def modulation_matrix(w: TravelingWave, jet: WaveJet, basis: KernelBasis | None = None) -> ModulationMatrix:
    basis = basis or kernel_basis(w, jet)
    k = w.k
    norm2 = inner(w.phi, w.phi)
    m21 = norm2 * jet.c_k + inner(basis.Psi2, apply_L1(w, jet.phi_k) + apply_L2(w, basis.Phi1)) / k
    m22 = norm2 * jet.c_P + inner(basis.Psi2, apply_L1(w, basis.Phi2)) / k
    A = np.array([[-k * jet.c_k, -k * jet.c_P], [m21, m22]])
    A.setflags(write=False)
    kind, disc = classify_entries(A)
    ref = (w.params.gamma, w.params.beta, w.k, w.P, w.c)
    return ModulationMatrix(A, eigenvalues_2x2(A), kind, disc, ref)


def kernel_residuals(w: TravelingWave, jet: WaveJet) -> dict[str, float]:
    """Max-coefficient residuals of the kernel identities of L0 and its adjoint.

    The adjoint identity for d^-2 phi_P holds up to a constant: the mean of
    L0^H d^-2 phi_P equals -k^2 <phi, phi_P> = -k^2.  Only pairings with
    mean-zero fields use it, so it is checked on the mean-zero subspace.
    """
    L = assemble_bloch(w, 0.0).L
    LH = L.conj().T
    k = w.k
    N = w.grid.n_modes
    phi = as_vector(w.phi)
    dphi = as_vector(differentiate(w.phi, 1))
    ddphi = as_vector(differentiate(w.phi, 2))
    r_adj2 = LH @ as_vector(antiderivative(jet.phi_P, 2)) + k**2 * jet.c_P * phi
    r_adj2[N] = 0.0
    r_k = L @ as_vector(jet.phi_k) + k**2 * jet.c_k * ddphi + as_vector(apply_L1(w, differentiate(w.phi, 1)))
    return {
        "L0_dphi": float(np.max(np.abs(L @ dphi))),
        "L0_phiP": float(np.max(np.abs(L @ as_vector(jet.phi_P) + k**2 * jet.c_P * ddphi))),
        "L0_phik": float(np.max(np.abs(r_k))),
        "L0H_antiphi": float(np.max(np.abs(LH @ as_vector(antiderivative(w.phi, 1))))),
        "L0H_anti2phiP": float(np.max(np.abs(r_adj2))),
    }


@dataclass(frozen=True)
class LinkCheck:
    residual: float
    row2_residuals: tuple[float, float]
    entry_residuals: np.ndarray


def verify_whitham_link(W: WhithamMatrix, M0: ModulationMatrix, c: float) -> LinkCheck:
    """Relative infinity-norm residual of W - (M0 - c I)."""
    if W.wave_ref and M0.wave_ref and not np.allclose(W.wave_ref, M0.wave_ref, rtol=1e-14, atol=0):
        raise WaveMismatch(f"{W.wave_ref} != {M0.wave_ref}")
    diff = W.entries - (M0.entries - c * np.eye(2))
    norm_W = float(np.max(np.sum(np.abs(W.entries), axis=1)))
    residual = float(np.max(np.sum(np.abs(diff), axis=1))) / max(norm_W, 1.0)
    return LinkCheck(residual, (float(diff[1, 0]), float(diff[1, 1])), diff)


# -- spectral curves near the origin -------------------------------------------------


@dataclass(frozen=True)
class SpectralCurve:
    xi_grid: np.ndarray
    branches: np.ndarray
    window_radius: float
    slopes: np.ndarray
    mu: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=complex))
    collisions: tuple = ()

    @property
    def max_real_part(self) -> float:
        return float(np.max(np.abs(self.branches.real), initial=0.0))


def default_window(w: TravelingWave, mu: np.ndarray, xi_max: float) -> float:
    """Radius that contains both small eigenvalues up to xi_max with a factor-two margin."""
    return 2.0 * w.k * xi_max * (1.0 + float(np.max(np.abs(mu))))


def _match(prev: np.ndarray, cand: np.ndarray) -> tuple[np.ndarray, bool]:
    """Assign the two candidates to the two previous values; report near-collisions."""
    d_same = abs(cand[0] - prev[0]) + abs(cand[1] - prev[1])
    d_swap = abs(cand[1] - prev[0]) + abs(cand[0] - prev[1])
    out = cand if d_same <= d_swap else cand[::-1]
    collision = abs(cand[0] - cand[1]) < 1e-3 * max(abs(cand[0]), abs(cand[1]), 1e-300)
    return np.array(out), collision


def small_pair(w: TravelingWave, xi: float, window_radius: float, N: int | None = None) -> np.ndarray:
    lam = pencil_eigs(assemble_bloch(w, xi, N))
    inside = int(np.sum(np.abs(lam) < window_radius))
    if inside > 2:
        raise WindowAmbiguous(xi, inside)
    return lam[:2]


def _resolve_window(xi_grid, spectra, radius: float, auto_shrink: bool) -> float:
    """Shrink the default radius until no grid point has more than two eigenvalues inside."""
    for xi, lam in zip(xi_grid, spectra):
        inside = int(np.sum(np.abs(lam) < radius))
        if inside <= 2:
            continue
        if not auto_shrink:
            raise WindowAmbiguous(xi, inside)
        radius = float(np.sqrt(abs(lam[1]) * abs(lam[2])))
    for xi, lam in zip(xi_grid, spectra):
        inside = int(np.sum(np.abs(lam) < radius))
        if inside != 2:
            raise WindowAmbiguous(xi, inside)
    return radius


def spectral_curves(
    w: TravelingWave,
    xi_grid,
    window_radius: float | None = None,
    *,
    jet: WaveJet | None = None,
    N: int | None = None,
) -> SpectralCurve:
    """Track the two eigenvalues bifurcating from lambda = 0 along an increasing xi grid.

    All eigensolves are done first; branch matching then runs in grid order.
    Without an explicit ``window_radius`` the default radius is shrunk
    automatically when a third eigenvalue enters it.
    """
    xi_grid = np.asarray(xi_grid, dtype=float)
    if xi_grid.ndim != 1 or xi_grid.size == 0 or np.any(np.diff(xi_grid) <= 0):
        raise ValueError("xi_grid must be a non-empty increasing sequence")
    if xi_grid[0] <= 0 or xi_grid[-1] >= np.pi:
        raise ValueError("xi_grid must lie in (0, pi)")
    if window_radius is not None and window_radius <= 0:
        raise ValueError("window_radius must be positive")
    from .waves import parameter_jet

    jet = jet or parameter_jet(w)
    mu = modulation_matrix(w, jet).mu
    spectra = [pencil_eigs(assemble_bloch(w, xi, N)) for xi in xi_grid]
    if window_radius is None:
        radius = _resolve_window(xi_grid, spectra, default_window(w, mu, xi_grid[-1]), True)
    else:
        radius = _resolve_window(xi_grid, spectra, float(window_radius), False)

    pairs = [lam[:2] for lam in spectra]
    # Order the first pair to follow mu, then continue by nearest neighbour.
    first = pairs[0] / (1j * w.k * xi_grid[0])
    if abs(first[0] - mu[1]) + abs(first[1] - mu[0]) < abs(first[0] - mu[0]) + abs(first[1] - mu[1]):
        pairs[0] = pairs[0][::-1]
    branches = [pairs[0]]
    collisions = []
    for i in range(1, len(pairs)):
        matched, hit = _match(branches[-1], pairs[i])
        branches.append(matched)
        if hit:
            collisions.append(float(xi_grid[i]))
    branches = np.array(branches).T
    slopes = branches[:, 0] / (1j * w.k * xi_grid[0])
    return SpectralCurve(xi_grid, branches, float(radius), slopes, mu, tuple(collisions))


def two_eigenvalue_limit(w: TravelingWave, xi_grid, *, jet: WaveJet | None = None, N: int | None = None) -> float:
    """Largest xi0 on the grid with exactly two eigenvalues in the default window for all xi <= xi0.

    Returns 0.0 if the count already differs from two at the first grid point.
    """
    from .waves import parameter_jet

    jet = jet or parameter_jet(w)
    mu = modulation_matrix(w, jet).mu
    xi0 = 0.0
    for xi in np.sort(np.asarray(xi_grid, dtype=float)):
        lam = pencil_eigs(assemble_bloch(w, xi, N))
        if int(np.sum(np.abs(lam) < default_window(w, mu, xi))) != 2:
            break
        xi0 = float(xi)
    return xi0


def slopes_at(w: TravelingWave, xi: float, mu: np.ndarray, window_radius: float, N: int | None = None) -> np.ndarray:
    """lambda_j(xi) / (i k xi), ordered to match the entries of ``mu``."""
    s = small_pair(w, xi, window_radius, N) / (1j * w.k * xi)
    if abs(s[0] - mu[1]) + abs(s[1] - mu[0]) < abs(s[0] - mu[0]) + abs(s[1] - mu[1]):
        s = s[::-1]
    return s


def richardson_slopes(
    w: TravelingWave,
    h: float = 1e-3,
    *,
    jet: WaveJet | None = None,
    N: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Extrapolate lambda_j(xi)/(i k xi) to xi -> 0 from xi in {4h, 2h, h}.

    Returns (extrapolated slopes, mu of M0), paired entrywise.
    """
    from .waves import parameter_jet

    jet = jet or parameter_jet(w)
    mu = modulation_matrix(w, jet).mu
    radius = default_window(w, mu, 4 * h)
    s1, s2, s4 = (slopes_at(w, f * h, mu, radius, N) for f in (1, 2, 4))
    return (8 * s1 - 6 * s2 + s4) / 3, mu


# -- periodic Evans function ------------------------------------------------------------


def _profile_evaluator(w: TravelingWave):
    b = w.phi.coeffs[w.grid.n_modes + 1 :].real
    keep = np.nonzero(np.abs(b) > 1e-18 * max(np.max(np.abs(b), initial=0.0), 1e-300))[0]
    n = keep + 1
    amp = 2 * b[keep]
    q = 2 * np.pi * n

    def evaluate(theta):
        cos = np.cos(q * theta)
        sin = np.sin(q * theta)
        return amp @ cos, -(amp * q) @ sin, -(amp * q * q) @ cos

    return evaluate


def _system_matrix(w: TravelingWave, lam: complex, phi_vals) -> np.ndarray:
    k, c = w.k, w.c
    beta, gamma = w.params.beta, w.params.gamma
    p, dp, ddp = phi_vals
    if beta != 0:
        A = np.zeros((4, 4), dtype=complex)
        A[0, 1] = A[1, 2] = A[2, 3] = 1.0
        s = 1.0 / (beta * k**4)
        A[3, 0] = s * (gamma - k**2 * ddp)
        A[3, 1] = s * (-2 * k**2 * dp - lam * k)
        A[3, 2] = s * k**2 * (c - p)
        return A
    A = np.zeros((2, 2), dtype=complex)
    A[0, 1] = 1.0
    s = 1.0 / (k**2 * (c - p))
    A[1, 0] = s * (k**2 * ddp - gamma)
    A[1, 1] = s * (lam * k + 2 * k**2 * dp)
    return A


EVANS_SEGMENTS = 8


def segment_maps(w: TravelingWave, lam: complex, segments: int = EVANS_SEGMENTS, rtol: float = 1e-10) -> list[np.ndarray]:
    """Fundamental matrices over [j/m, (j+1)/m] for j = 0, ..., m-1.

    The state is (v, v', v'', v''') for beta != 0 and (v, v') for beta = 0.
    """
    if segments < 1:
        raise ValueError("segments must be at least 1")
    profile = _profile_evaluator(w)
    dim = 4 if w.params.beta != 0 else 2

    def rhs(theta, y):
        A = _system_matrix(w, lam, profile(theta))
        return (A @ y.reshape(dim, dim)).ravel()

    y0 = np.eye(dim, dtype=complex).ravel()
    maps = []
    for j in range(segments):
        span = (j / segments, (j + 1) / segments)
        sol = scipy.integrate.solve_ivp(rhs, span, y0, method="DOP853", rtol=rtol, atol=rtol * 1e-3)
        if not sol.success:
            raise StiffIntegrationFailure(sol.message)
        maps.append(sol.y[:, -1].reshape(dim, dim))
    return maps


def monodromy(w: TravelingWave, lam: complex, rtol: float = 1e-10, segments: int = 1) -> np.ndarray:
    """Period map of the first-order system equivalent to L[phi] v = lambda k v'."""
    maps = segment_maps(w, lam, segments, rtol)
    M = maps[0]
    for F in maps[1:]:
        M = F @ M
    return M


def evans_scale(M: np.ndarray) -> float:
    """Normalization prod_j (1 + |m_j|) over the Floquet multipliers."""
    return float(np.prod(1.0 + np.abs(np.linalg.eigvals(M))))


def cyclic_determinant(maps: list[np.ndarray], z: complex) -> complex:
    """det(F_m ... F_1 - z I) evaluated through the cyclic block matrix of the segment maps.

    Forming the product first loses the unimodular multipliers to round-off once the
    growing and decaying modes are far apart; the block form keeps each factor moderate.
    """
    m, n = len(maps), maps[0].shape[0]
    C = np.zeros((m * n, m * n), dtype=complex)
    eye = np.eye(n)
    C[:n, :n] = -z * eye
    C[:n, (m - 1) * n :] += maps[-1]
    for j in range(1, m):
        C[j * n : (j + 1) * n, (j - 1) * n : j * n] = maps[j - 1]
        C[j * n : (j + 1) * n, j * n : (j + 1) * n] = -eye
    sign = -1.0 if (n * (m - 1)) % 2 else 1.0
    return sign * complex(np.linalg.det(C))


def monodromy_evans(
    w: TravelingWave, lam: complex, xi: float, rtol: float = 1e-10, segments: int = EVANS_SEGMENTS
) -> complex:
    """Periodic Evans function det(M(lambda) - exp(i xi) I), by multiple shooting."""
    return cyclic_determinant(segment_maps(w, lam, segments, rtol), np.exp(1j * xi))


def constant_coefficient_monodromy(w: TravelingWave, lam: complex) -> np.ndarray:
    """Exact period map exp(A) for the zero profile."""
    A = _system_matrix(w, lam, (0.0, 0.0, 0.0))
    return scipy.linalg.expm(A)
