"""Hydrostatic primitive equations with fractional horizontal dissipation.

The package pairs a pseudo-spectral solver (Fourier in x, finite differences
in z) and its monitors with a calculator for the regularity exponents and
thresholds that govern global well-posedness.
"""

from .config import ConfigError, SimConfig, parse_config
from .dynamics import BlowupError, Integrator, State, run, step_ifrk4
from .exponents import bootstrap, exponent_table, find_thresholds
from .spectral import Grid

__all__ = [
    "BlowupError", "ConfigError", "Grid", "Integrator", "SimConfig", "State",
    "bootstrap", "exponent_table", "find_thresholds", "parse_config", "run", "step_ifrk4",
]
__version__ = "0.1.0"
