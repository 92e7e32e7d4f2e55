"""Cubature for weakly singular integrals and iterative capacitance of star-shaped conductors."""

import logging

from .errors import (ArgumentError, ConvergenceError, DivergenceError, KernelDomainError,
                     MeshError, MeshParseError, WSingularError)

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "ConvergenceError", "DivergenceError", "KernelDomainError",
    "MeshError", "MeshParseError", "WSingularError", "__version__",
]
