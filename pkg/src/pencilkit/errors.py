"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad or inconsistent
input data, CLI exit code 3) and ``NumericalError`` (the data is well formed
but the requested computation is singular or does not converge, exit code 4).
"""

from __future__ import annotations


class PencilError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(PencilError, ValueError):
    exit_code = 3


class StructuralError(ValidationError):
    """Dimension mismatch or malformed matrix data."""


class CouplingIncompatibleError(ValidationError):
    """Two systems cannot be coupled (channel spaces or signatures differ)."""


class GridError(ValidationError):
    """Duplicate, unsorted or otherwise unusable quadrature nodes."""


class PairingError(ValidationError):
    """Symmetric-pair term requested on nodes without a mirrored partner."""


class PreconditionError(ValidationError):
    """A stated sufficient condition of an algorithm does not hold."""


class NumericalError(PencilError, ArithmeticError):
    exit_code = 4


class SpectralPointError(NumericalError):
    """The evaluation point lies on (or numerically at) the spectrum."""


class FactorizationInfeasibleError(NumericalError):
    """No spectral gap separates the two halves of the pencil spectrum."""


class SplitInvalidError(NumericalError):
    """The selected invariant subspace is not the graph of an operator."""


class DivergenceError(NumericalError):
    """An iteration failed to converge within its budget."""


class NoUniqueSolutionError(NumericalError):
    """A Sylvester equation has overlapping coefficient spectra."""


class ContourInvalidError(NumericalError):
    """A quadrature contour passes too close to, or splits, a spectral set."""


class KernelSingularError(NumericalError):
    """The two pointwise roots coincide, so the Volterra kernel blows up."""


class BoundaryProblemUndefinedError(NumericalError):
    """The scalar Riemann boundary problem is not defined at this point."""
