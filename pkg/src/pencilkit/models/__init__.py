"""Discretized functional models."""

from .anticanon import AnticommutingDecomposition, anticommuting_canonical_form
from .grid import (
    GridModel,
    KernelOnGrid,
    ModelQuadruple,
    anticommutator_general,
    anticommutator_nullity,
    channel_map,
    hilbert_root,
    kernel_from_channels,
    mirror_pairs,
    model_quadruple,
    stieltjes_anticommutator,
)
from .riemann import RiemannProblemData, direct_charfn_scalar, direct_model_pair, riemann_charfn_scalar
from .volterra import (
    VolterraModel,
    closed_form_kernel,
    continuous_roots,
    kernel_equation_residual,
    volterra_build,
)

__all__ = [
    "AnticommutingDecomposition",
    "anticommuting_canonical_form",
    "GridModel",
    "KernelOnGrid",
    "ModelQuadruple",
    "anticommutator_general",
    "anticommutator_nullity",
    "channel_map",
    "hilbert_root",
    "kernel_from_channels",
    "mirror_pairs",
    "model_quadruple",
    "stieltjes_anticommutator",
    "RiemannProblemData",
    "direct_charfn_scalar",
    "direct_model_pair",
    "riemann_charfn_scalar",
    "VolterraModel",
    "closed_form_kernel",
    "continuous_roots",
    "kernel_equation_residual",
    "volterra_build",
]
