"""Simulation toolkit for lattice-driven motional squeezing of a trapped ion.

Modules
-------
fock        truncated Fock-space states and unitaries
dynamics    full-potential propagators (spatial grid and Fock basis)
protocol    internal-state-conditioned squeezing gate and X-state preparation
phasespace  characteristic functions, Wigner values, interference zeros
scenarios   config-driven runs with manifests and deterministic outputs
cli         `ionsqueeze` command-line entry point
"""

__version__ = "0.1.0"

from . import dynamics, fock, phasespace, protocol, scenarios
from .errors import (
    BoundaryLeakError,
    ConfigError,
    NumericalHealthError,
    ParityError,
    ProjectionError,
    StepSizeError,
    TailLeakError,
    TruncationError,
)

__all__ = [
    "fock",
    "dynamics",
    "protocol",
    "phasespace",
    "scenarios",
    "ConfigError",
    "NumericalHealthError",
    "TruncationError",
    "BoundaryLeakError",
    "TailLeakError",
    "ProjectionError",
    "StepSizeError",
    "ParityError",
    "__version__",
]
