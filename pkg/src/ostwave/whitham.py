"""Whitham modulation matrix W(phi) and the small-amplitude Lighthill diagnostics."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BetaNonZero, BetaZero, DegenerateStokes
from .spectral import antiderivative, differentiate, inner, multiply
from .waves import ModelParams, TravelingWave, WaveJet, second_harmonic

DISCRIMINANT_TOL = 1e-8


class Classification(str, enum.Enum):
    STRICTLY_HYPERBOLIC = "StrictlyHyperbolic"
    ELLIPTIC = "Elliptic"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class WhithamMatrix:
    entries: np.ndarray
    eigenvalues: np.ndarray
    classification: Classification
    discriminant: float
    wave_ref: tuple

    @classmethod
    def from_entries(cls, entries, wave_ref=(), tol: float = DISCRIMINANT_TOL) -> "WhithamMatrix":
        A = np.array(entries, dtype=float)
        A.setflags(write=False)
        kind, disc = classify_entries(A, tol)
        return cls(A, eigenvalues_2x2(A), kind, disc, tuple(wave_ref))


def eigenvalues_2x2(A: np.ndarray) -> np.ndarray:
    """Roots of lambda^2 - tr lambda + det, ordered by real part then imaginary part.

    Complex roots are returned as an exact conjugate pair.
    """
    tr = A[0, 0] + A[1, 1]
    disc = (A[0, 0] - A[1, 1]) ** 2 + 4 * A[0, 1] * A[1, 0]
    if disc < 0:
        half = np.sqrt(-disc) / 2
        return np.array([complex(tr / 2, -half), complex(tr / 2, half)])
    root = np.sqrt(disc)
    big = (tr + np.copysign(root, tr)) / 2
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    # Recover the smaller-magnitude root from the product to avoid cancellation.
    small = det / big if big != 0 else 0.0
    return np.array(sorted([complex(big), complex(small)], key=lambda z: (z.real, z.imag)))


def classify_entries(A: np.ndarray, tol: float = DISCRIMINANT_TOL) -> tuple[Classification, float]:
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    # tr^2 - 4 det written without the cancellation between tr^2 and 4 det.
    disc = (A[0, 0] - A[1, 1]) ** 2 + 4 * A[0, 1] * A[1, 0]
    scale = max(tr * tr, abs(det), 1.0)
    if disc > tol * scale:
        return Classification.STRICTLY_HYPERBOLIC, float(disc)
    if disc < -tol * scale:
        return Classification.ELLIPTIC, float(disc)
    return Classification.DEGENERATE, float(disc)


def classify(W, tol: float = DISCRIMINANT_TOL) -> Classification:
    """Hyperbolic/elliptic/degenerate from the discriminant of a 2x2 matrix."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = W.entries if hasattr(W, "entries") else np.asarray(W, dtype=float)
    return classify_entries(A, tol)[0]


def flux_derivatives(w: TravelingWave, jet: WaveJet) -> tuple[float, float]:
    """(G_k, G_P): derivatives of the modulation flux along the family."""
    phi, k = w.phi, w.k
    beta, gamma = w.params.beta, w.params.gamma
    phi2 = multiply(phi, phi)
    d1 = differentiate(phi, 1)
    anti = antiderivative(phi, 1)

    def directional(dphi, explicit_k: bool) -> float:
        val = -inner(phi2, dphi)
        val += 3 * beta * k**2 * inner(d1, differentiate(dphi, 1))
        val += gamma / k**2 * inner(anti, antiderivative(dphi, 1))
        if explicit_k:
            val += 3 * beta * k * inner(d1, d1) - gamma / k**3 * inner(anti, anti)
        return val

    return directional(jet.phi_k, True), directional(jet.phi_P, False)


def whitham_matrix(w: TravelingWave, jet: WaveJet, tol: float = DISCRIMINANT_TOL) -> WhithamMatrix:
    G_k, G_P = flux_derivatives(w, jet)
    entries = [
        [-(w.c + w.k * jet.c_k), -w.k * jet.c_P],
        [G_k, G_P],
    ]
    ref = (w.params.gamma, w.params.beta, w.k, w.P, w.c)
    return WhithamMatrix.from_entries(entries, ref, tol)


def reduced_whitham_matrix(w: TravelingWave, jet: WaveJet, tol: float = DISCRIMINANT_TOL) -> WhithamMatrix:
    """Whitham matrix of the reduced (beta = 0) model."""
    if w.params.beta != 0:
        raise BetaNonZero(f"reduced model requires beta = 0, got {w.params.beta}")
    return whitham_matrix(w, jet, tol)


# -- Stokes-wave closed forms --------------------------------------------------------


def omega0_derivatives(k: float, params: ModelParams) -> tuple[float, float, float]:
    """Linear frequency omega0(k) = k c0(k) and its first two derivatives."""
    g, b, pi2 = params.gamma, params.beta, np.pi**2
    w0 = g / (4 * pi2 * k) - 4 * b * pi2 * k**3
    w1 = -g / (4 * pi2 * k**2) - 12 * b * pi2 * k**2
    w2 = g / (2 * pi2 * k**3) - 24 * b * pi2 * k
    return w0, w1, w2


def stokes_lighthill(k: float, params: ModelParams) -> float:
    """omega0''(k) omega2(k) = (gamma - 48 beta pi^4 k^4) / (3 (gamma + 64 beta pi^4 k^4))."""
    g, b = params.gamma, params.beta
    q = np.pi**4 * k**4
    denom = g + 64 * b * q
    if denom == 0 or abs(denom) <= 1e-14 * max(g, abs(64 * b * q)):
        raise DegenerateStokes(f"gamma + 64 beta pi^4 k^4 = 0 at k={k:.12g}")
    return (g - 48 * b * q) / (3 * denom)


def stokes_lighthill_from_frequencies(k: float, params: ModelParams) -> float:
    """Same product assembled from omega0'' and omega2 = k A2; used to cross-check."""
    return omega0_derivatives(k, params)[2] * k * second_harmonic(k, params)


def critical_frequency(params: ModelParams) -> float:
    """Frequency at which the Stokes-regime Lighthill product changes sign."""
    g, b = params.gamma, params.beta
    if b == 0:
        raise BetaZero("no finite critical frequency for beta = 0")
    if b > 0:
        return (g / (48 * b * np.pi**4)) ** 0.25
    return (g / (64 * abs(b) * np.pi**4)) ** 0.25


def stokes_whitham_eigenvalues(a: float, k: float, params: ModelParams) -> np.ndarray:
    """Leading-order Whitham eigenvalues -omega0'(k) +/- a sqrt(omega2 omega0'') of a Stokes wave."""
    w1 = omega0_derivatives(k, params)[1]
    root = np.sqrt(complex(stokes_lighthill(k, params)))
    lam = np.array([-w1 - a * root, -w1 + a * root])
    return np.array(sorted(lam, key=lambda z: (z.real, z.imag)))
