"""Stabilizer Renyi entropy of reduced states as a probe of quantum phase transitions."""

from .errors import (
    ConvergenceError,
    EdgeExtremumError,
    InvalidArgumentError,
    NumericalError,
    ReconstructionError,
    UnreliableFitError,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceError",
    "EdgeExtremumError",
    "InvalidArgumentError",
    "NumericalError",
    "ReconstructionError",
    "UnreliableFitError",
]
