"""Goodness-of-fit tests for gamma laws of known shape via Hankel transforms."""
__version__ = "0.1.0"

from .gof import Sample, rescale, t_statistic
from .spectrum import solve_eigenvalues, spectral_params, trace_s
from .nulldist import McProtocol, critical_value_spectral, simulate_null

__all__ = [
    "Sample", "rescale", "t_statistic", "spectral_params", "solve_eigenvalues",
    "trace_s", "McProtocol", "critical_value_spectral", "simulate_null", "__version__",
]
