"""Truncated Fourier representation of real 1-periodic functions on [0, 1).

A field stores the full Hermitian coefficient vector for modes n = -N..N,
so ``coeffs[N + n]`` is the coefficient of exp(2 pi i n theta).  Products are
evaluated on a padded collocation grid with at least 3N+1 points, which is
enough to make quadratic products alias-free in the retained modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, MeanNotZero

DEFAULT_MODES = 64
DEFAULT_POINTS = 256
MEAN_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class PeriodicGrid:
    n_modes: int = DEFAULT_MODES
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be positive")
        if self.n_points < 3 * self.n_modes + 1:
            raise ValueError(
                f"n_points={self.n_points} too small for dealiased products with "
                f"{self.n_modes} modes (need >= {3 * self.n_modes + 1})"
            )

    @classmethod
    def for_modes(cls, n_modes: int) -> "PeriodicGrid":
        """Grid with the smallest power-of-two point count that dealiases ``n_modes``."""
        n_points = 1 << int(np.ceil(np.log2(3 * n_modes + 1)))
        return cls(n_modes, n_points)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.n_modes, self.n_modes + 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points) / self.n_points

    @property
    def size(self) -> int:
        return 2 * self.n_modes + 1


class SpectralField:
    """Real 1-periodic function held as Hermitian Fourier coefficients.

    Instances are treated as immutable; the coefficient array is marked
    read-only after construction.
    """

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: PeriodicGrid, coeffs, *, enforce_hermitian: bool = True):
        c = np.array(coeffs, dtype=complex)
        if c.shape != (grid.size,):
            raise ValueError(f"expected {grid.size} coefficients, got shape {c.shape}")
        if enforce_hermitian:
            c = 0.5 * (c + np.conj(c[::-1]))
        c.setflags(write=False)
        self.grid = grid
        self.coeffs = c

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "SpectralField":
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def constant(cls, grid: PeriodicGrid, value: float) -> "SpectralField":
        c = np.zeros(grid.size, dtype=complex)
        c[grid.n_modes] = value
        return cls(grid, c)

    @classmethod
    def from_cosines(cls, grid: PeriodicGrid, amplitudes) -> "SpectralField":
        """Even field sum_{n>=1} amplitudes[n-1] cos(2 pi n theta)."""
        a = np.asarray(amplitudes, dtype=float)
        if a.size > grid.n_modes:
            raise ValueError("more cosine amplitudes than retained modes")
        c = np.zeros(grid.size, dtype=complex)
        N = grid.n_modes
        c[N + 1 : N + 1 + a.size] = a / 2
        c[N - a.size : N][::-1] = a / 2
        return cls(grid, c)

    @classmethod
    def from_values(cls, grid: PeriodicGrid, values) -> "SpectralField":
        """Project samples on the grid nodes onto the retained modes."""
        v = np.asarray(values, dtype=float)
        if v.shape != (grid.n_points,):
            raise ValueError("values must be sampled on the grid nodes")
        return cls(grid, _truncate(np.fft.fft(v) / grid.n_points, grid.n_modes))

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func) -> "SpectralField":
        return cls.from_values(grid, func(grid.nodes))

    # -- accessors ----------------------------------------------------------

    def coeff(self, n: int) -> complex:
        return complex(self.coeffs[self.grid.n_modes + n])

    @property
    def mean(self) -> complex:
        return self.coeff(0)

    @property
    def cosine_amplitudes(self) -> np.ndarray:
        """Amplitudes a_n of cos(2 pi n theta), n = 1..N (real part only)."""
        N = self.grid.n_modes
        return 2 * self.coeffs[N + 1 :].real

    def values(self, n_points: int | None = None) -> np.ndarray:
        """Samples at theta_m = m / n_points (defaults to the grid nodes)."""
        M = self.grid.n_points if n_points is None else n_points
        return np.fft.ifft(_pad(self.coeffs, M)).real * M

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        phase = np.exp(2j * np.pi * np.multiply.outer(theta, self.grid.modes))
        return (phase @ self.coeffs).real

    def norm(self) -> float:
        """L2(0,1) norm."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def max_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_even(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs.imag), initial=0.0) <= tol * max(1.0, self.max_coeff()))

    # -- linear algebra -----------------------------------------------------

    def _check(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise GridMismatch(f"{self.grid} != {other.grid}")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField(self.grid, self.coeffs + other.coeffs, enforce_hermitian=False)
        return self + SpectralField.constant(self.grid, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return multiply(self, scalar)
        return SpectralField(self.grid, self.coeffs * float(scalar), enforce_hermitian=False)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __repr__(self):
        return f"SpectralField(n_modes={self.grid.n_modes}, norm={self.norm():.6g})"

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n_modes": self.grid.n_modes,
            "n_points": self.grid.n_points,
            "coeffs": [[float(z.real), float(z.imag)] for z in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SpectralField":
        N = int(data["n_modes"])
        grid = PeriodicGrid(N, int(data["n_points"])) if "n_points" in data else PeriodicGrid.for_modes(N)
        coeffs = np.array([complex(re, im) for re, im in data["coeffs"]])
        return cls(grid, coeffs)

    def resample(self, grid: PeriodicGrid) -> "SpectralField":
        """Zero-pad or truncate onto another grid."""
        N_old, N_new = self.grid.n_modes, grid.n_modes
        c = np.zeros(grid.size, dtype=complex)
        m = min(N_old, N_new)
        c[N_new - m : N_new + m + 1] = self.coeffs[N_old - m : N_old + m + 1]
        return SpectralField(grid, c, enforce_hermitian=False)


def _pad(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    """Place mode coefficients into FFT ordering of length n_points."""
    N = (coeffs.size - 1) // 2
    out = np.zeros(n_points, dtype=complex)
    out[: N + 1] = coeffs[N:]
    out[n_points - N :] = coeffs[:N]
    return out


def _truncate(spectrum: np.ndarray, n_modes: int) -> np.ndarray:
    """Inverse of _pad: FFT-ordered spectrum to centered modes -N..N."""
    return np.concatenate([spectrum[-n_modes:], spectrum[: n_modes + 1]])


def wavenumbers(grid: PeriodicGrid, xi: float = 0.0) -> np.ndarray:
    """Symbol of d/dtheta (+ i xi) on the retained modes."""
    return 1j * (2 * np.pi * grid.modes + xi)


def differentiate(f: SpectralField, order: int = 1) -> SpectralField:
    if order < 1:
        raise ValueError("order must be >= 1")
    return SpectralField(f.grid, f.coeffs * wavenumbers(f.grid) ** order, enforce_hermitian=False)


def mean_zero_tolerance(f: SpectralField) -> float:
    return MEAN_ZERO_RTOL * max(1.0, f.norm())


def antiderivative(f: SpectralField, order: int = 1) -> SpectralField:
    """Mean-zero antiderivative of a mean-zero field, applied ``order`` times."""
    if order < 1:
        raise ValueError("order must be >= 1")
    tol = mean_zero_tolerance(f)
    if abs(f.mean) > tol:
        raise MeanNotZero(f.mean, tol)
    sym = wavenumbers(f.grid)
    sym[f.grid.n_modes] = 1.0
    c = f.coeffs / sym**order
    c[f.grid.n_modes] = 0.0
    return SpectralField(f.grid, c, enforce_hermitian=False)


def inner_product(f: SpectralField, g: SpectralField) -> complex:
    """Integral over one period of conj(f) * g, exact by Parseval."""
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid} != {g.grid}")
    return complex(np.vdot(f.coeffs, g.coeffs))


def inner(f: SpectralField, g: SpectralField) -> float:
    """Real part of ``inner_product``, for the real pairings used downstream."""
    return inner_product(f, g).real


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased product truncated back to the retained modes."""
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid} != {g.grid}")
    M, N = f.grid.n_points, f.grid.n_modes
    fv = np.fft.ifft(_pad(f.coeffs, M)) * M
    gv = np.fft.ifft(_pad(g.coeffs, M)) * M
    spectrum = np.fft.fft(fv * gv) / M
    return SpectralField(f.grid, _truncate(spectrum, N))


def toeplitz_of(f: SpectralField, size: int | None = None) -> np.ndarray:
    """Matrix of w -> f*w on modes -K..K with K = ``size`` (defaults to N).

    Entry [j, l] is the coefficient of f at mode (j - l), zero outside the
    retained band.
    """
    N = f.grid.n_modes
    K = N if size is None else size
    idx = np.arange(-K, K + 1)
    diff = idx[:, None] - idx[None, :]
    T = np.zeros((2 * K + 1, 2 * K + 1), dtype=complex)
    band = np.abs(diff) <= N
    T[band] = f.coeffs[N + diff[band]]
    return T


def as_vector(f: SpectralField) -> np.ndarray:
    """Coefficient vector ordered n = -N..N (a writable copy)."""
    return np.array(f.coeffs)
