"""Quadratic operator pencils ``L(lam) = lam^2 I + lam B + A`` attached to colligations.

Submodules
----------
core      colligations, pencils, resolvents
factor    spectral roots and the coupling operator
dynamics  closed-form and RK4 solutions of the open system, energy balance
charfn    characteristic functions and metric relations
coupling  coupling, root synthesis, scalar chains and their continuous limit
models    grid models: Hilbert/Stieltjes transforms, anti-commuting pairs,
          Volterra model, scalar Riemann boundary problem
"""

from .core import (
    Colligation,
    DefectReport,
    PencilSystem,
    SpectrumInfo,
    colligation_from_operator,
    embed_defect,
    pencil_eval,
    resolvent_eval,
    spectral_separation,
    validate_colligation,
)
from .errors import (
    PencilError,
    ValidationError,
    StructuralError,
    CouplingIncompatibleError,
    GridError,
    PairingError,
    PreconditionError,
    NumericalError,
    SpectralPointError,
    FactorizationInfeasibleError,
    SplitInvalidError,
    DivergenceError,
    NoUniqueSolutionError,
    ContourInvalidError,
    KernelSingularError,
    BoundaryProblemUndefinedError,
)
from .factor import (
    ContourSpec,
    FactoredPencil,
    coupling_K_contour,
    coupling_K_sylvester,
    default_contour,
    factor_bernoulli,
    factor_spectral,
    verify_identities,
)

__version__ = "0.1.0"

__all__ = [
    "Colligation",
    "DefectReport",
    "PencilSystem",
    "SpectrumInfo",
    "colligation_from_operator",
    "embed_defect",
    "pencil_eval",
    "resolvent_eval",
    "spectral_separation",
    "validate_colligation",
    "PencilError",
    "ValidationError",
    "StructuralError",
    "CouplingIncompatibleError",
    "GridError",
    "PairingError",
    "PreconditionError",
    "NumericalError",
    "SpectralPointError",
    "FactorizationInfeasibleError",
    "SplitInvalidError",
    "DivergenceError",
    "NoUniqueSolutionError",
    "ContourInvalidError",
    "KernelSingularError",
    "BoundaryProblemUndefinedError",
    "ContourSpec",
    "FactoredPencil",
    "coupling_K_contour",
    "coupling_K_sylvester",
    "default_contour",
    "factor_bernoulli",
    "factor_spectral",
    "verify_identities",
]
