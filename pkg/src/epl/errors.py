"""Exception taxonomy shared by all modules."""

from __future__ import annotations


class EplError(Exception):
    """Base class for every toolkit error."""


class InputError(EplError, ValueError):
    """Malformed or inconsistent input (bad schedule, non-cone, schema violation)."""


class DimensionMismatchError(InputError):
    """Operands live in different ambient dimensions."""


class PreconditionError(EplError):
    """A documented operation precondition does not hold (e.g. base point not in set)."""


class NumericFailure(EplError):
    """A numerical routine did not converge.  Carries the best iterate found."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ExtremalityViolated(EplError):
    """The shifted sets intersect where extremality was required; names the rung."""

    def __init__(self, rung: int, residual: float):
        super().__init__(
            f"shifted sets intersect at rung {rung} (residual {residual:.3e}); "
            "the supplied schedule does not certify extremality"
        )
        self.rung = rung
        self.residual = residual
