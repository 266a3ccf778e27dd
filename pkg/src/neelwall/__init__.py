"""Numerical laboratory for static Neel walls in thin-film micromagnetics.

Computes the static wall phase as the minimizer of the reduced nonlocal
energy, verifies the spectral structure of the linearization (translation
mode, spectral gap, block-operator spectra), and measures orbital stability
of the damped wave dynamics.
"""

__version__ = "0.1.0"

from .grid import Grid, Field
from . import grid, profile, operators, dynamics, spectra, config, io, cli  # noqa: F401,E402

__all__ = [
    "Grid", "Field", "grid", "profile", "operators", "dynamics", "spectra",
    "config", "io", "cli", "__version__",
]
