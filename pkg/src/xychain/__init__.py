"""Entanglement and noise correlations of the periodic anisotropic XY chain.

The ground state is solved exactly through a Jordan-Wigner map to free
fermions; every spin correlator is a Pfaffian of Majorana contractions.  A
dense exact-diagonalization path for small rings serves as an oracle.
"""

from .errors import (
    ConfigError,
    DegenerateModeError,
    NumericalIntegrityError,
    OracleMismatchError,
    XYChainError,
)
from .model import LAMBDA_C, ModelParams, majorana_covariance
from .pauli import PauliString, pauli_expectation
from .pfaffian import pfaffian

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateModeError",
    "LAMBDA_C",
    "ModelParams",
    "NumericalIntegrityError",
    "OracleMismatchError",
    "PauliString",
    "XYChainError",
    "majorana_covariance",
    "pauli_expectation",
    "pfaffian",
]
