"""Periodic traveling waves of the Ostrovsky equation, their Whitham modulation
matrix, and the Bloch spectrum near the origin."""

__version__ = "0.1.0"

from .bloch import (
    BlochMatrices,
    KernelBasis,
    ModulationMatrix,
    SpectralCurve,
    assemble_bloch,
    kernel_basis,
    modulation_matrix,
    monodromy_evans,
    pencil_eigs,
    richardson_slopes,
    spectral_curves,
    verify_whitham_link,
)
from .errors import OstwaveError
from .spectral import PeriodicGrid, SpectralField
from .waves import (
    ModelParams,
    StokesExpansion,
    TravelingWave,
    WaveJet,
    continue_family,
    parameter_jet,
    refine,
    solve_wave,
    stokes_seed,
)
from .whitham import (
    Classification,
    WhithamMatrix,
    classify,
    critical_frequency,
    stokes_lighthill,
    whitham_matrix,
)

__all__ = [
    "BlochMatrices",
    "Classification",
    "KernelBasis",
    "ModelParams",
    "ModulationMatrix",
    "OstwaveError",
    "PeriodicGrid",
    "SpectralCurve",
    "SpectralField",
    "StokesExpansion",
    "TravelingWave",
    "WaveJet",
    "WhithamMatrix",
    "assemble_bloch",
    "classify",
    "continue_family",
    "critical_frequency",
    "kernel_basis",
    "modulation_matrix",
    "monodromy_evans",
    "parameter_jet",
    "pencil_eigs",
    "refine",
    "richardson_slopes",
    "solve_wave",
    "spectral_curves",
    "stokes_lighthill",
    "stokes_seed",
    "verify_whitham_link",
    "whitham_matrix",
]
