"""
Errors - Everything that can go wrong, with the exit code it maps to.

Three families:
1. ModelInvalidError        the input is not a valid symmetric insulator model (exit 1)
2. NumericError and friends the numerics could not certify an answer (exit 2)
3. InternalConsistencyError independent pathways disagreed (exit 3)

SizeError and UsageError (exit 1) reject too-short chains and malformed arguments.
"""

from typing import Optional


class ChainError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 2


class ModelInvalidError(ChainError):
    """
    A model document or model object violates its structural assumptions.

    Args:
        message: Human readable explanation
        code: Machine readable reason, one of CODES
    """

    exit_code = 1
    CODES = (
        "schema",
        "dimension_mismatch",
        "empty_hoppings",
        "non_hermitian_onsite",
        "non_unitary_symmetry",
        "odd_dimension",
        "symmetry_violation",
    )

    def __init__(self, message: str, code: str = "schema"):
        if code not in self.CODES:
            raise ValueError(f"unknown model error code {code!r}")
        super().__init__(f"[{code}] {message}")
        self.code = code


class NumericError(ChainError):
    """A numerical routine could not reach its accuracy contract."""

    exit_code = 2


class EigenSolverError(NumericError):
    """The Jacobi iteration did not converge."""

    def __init__(self, message: str, sweeps: int):
        super().__init__(f"{message} (after {sweeps} sweeps)")
        self.sweeps = sweeps


class GapError(NumericError):
    """The Hamiltonian is not an insulator: spectrum reaches the zero-energy gap."""

    def __init__(self, message: str, k: Optional[float] = None):
        if k is not None:
            message = f"{message} at k={k:.12g}"
        super().__init__(message)
        self.k = k


class DomainError(GapError):
    """A closed-form oracle was asked about gapless parameters."""


class ContourError(NumericError):
    """The Riesz contour passes too close to an eigenvalue."""


class ConvergenceError(NumericError):
    """Transport or frame residuals exceed their limits; refine the grid."""


class ResolutionError(NumericError):
    """A Berry phase is too far from an integer to be rounded safely."""


class AliasingError(NumericError):
    """Adjacent phase steps of a loop are too large for the sampling grid."""


class KatoNagyDistanceError(NumericError):
    """Two projections are too far apart for the Kato-Nagy unitary."""


class GaugeError(NumericError):
    """A Bloch gauge is not block diagonal, unitary or periodic."""


class PathError(NumericError):
    """A homotopy path failed at one of its samples."""

    def __init__(self, message: str, sample: Optional[float] = None):
        if sample is not None:
            message = f"{message} (path parameter t={sample:.12g})"
        super().__init__(message)
        self.sample = sample


class UsageError(ChainError):
    """Command line arguments or settings overrides are malformed."""

    exit_code = 1


class SizeError(ChainError):
    """A truncated chain is too short for the hopping range."""

    exit_code = 1


class InternalConsistencyError(ChainError):
    """Independent computations of the same integer disagree."""

    exit_code = 3
