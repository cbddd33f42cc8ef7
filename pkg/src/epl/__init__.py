"""Desk-scale toolkit for extremality certificates over closed sets in R^n.

The package is organised around a small catalog of set oracles (membership,
Euclidean projection, distance), numerical normal-cone estimators built on the
projector, extremality verifiers and certificate checks for finite and
countable set systems, an intersection calculus for rated normals, and
first-order optimality checks for programs with countably many geometric
constraints.  All sampling is derived deterministically from a scenario seed.
"""

__version__ = "0.1.0"

from . import defaults
from .errors import (
    EplError,
    InputError,
    DimensionMismatchError,
    PreconditionError,
    NumericFailure,
    ExtremalityViolated,
)

__all__ = [
    "__version__",
    "defaults",
    "EplError",
    "InputError",
    "DimensionMismatchError",
    "PreconditionError",
    "NumericFailure",
    "ExtremalityViolated",
]
