"""Gray-Scott-Klausmeier pattern formation: Turing analysis, amplitude equation and validation."""
from .model import GSKModel, ModelParams, gsk_fixed_points
from .spectral import Grid1D, SpectralField
from .bifurcation import dispersion, find_critical, gl_coefficients

__all__ = [
    "GSKModel",
    "ModelParams",
    "gsk_fixed_points",
    "Grid1D",
    "SpectralField",
    "dispersion",
    "find_critical",
    "gl_coefficients",
]
