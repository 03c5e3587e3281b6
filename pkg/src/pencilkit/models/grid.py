"""Quadrature discretizations of ``L^2(dF)`` and the transform-type model operators.

A :class:`GridModel` replaces the measure ``dF`` by point masses ``w_i`` at
nodes ``x_i``.  Operators are returned in orthonormal coordinates
``g_i = sqrt(w_i) f(x_i)``, so an integral operator with kernel ``k(x, t)``
becomes the matrix ``sqrt(w_i) k(x_i, x_j) sqrt(w_j)`` and self-adjoint
operators become Hermitian matrices.  Principal-value integrals drop the
diagonal term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import _herm, opnorm
from ..errors import GridError, PairingError, PreconditionError, StructuralError

__all__ = [
    "GridModel",
    "KernelOnGrid",
    "ModelQuadruple",
    "kernel_from_channels",
    "channel_map",
    "hilbert_root",
    "model_quadruple",
    "stieltjes_anticommutator",
    "anticommutator_nullity",
    "anticommutator_general",
    "mirror_pairs",
]

PAIR_TOL = 1e-12


@dataclass(frozen=True)
class GridModel:
    """Nodes, positive weights, the multiplier ``b(x)`` and channel functions ``v_alpha(x)``.

    ``v`` has shape ``(N, m)`` and ``J`` is an ``m x m`` diagonal signature.
    """

    nodes: np.ndarray
    weights: np.ndarray
    mult_b: np.ndarray | None = None
    v: np.ndarray | None = None
    J: np.ndarray | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.nodes, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if x.size == 0:
            raise GridError("grid needs at least one node")
        if w.shape != x.shape:
            raise GridError(f"{w.size} weights for {x.size} nodes")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(w)):
            raise GridError("nodes and weights must be finite")
        if np.any(np.diff(x) <= 0):
            raise GridError("nodes must be strictly increasing (no duplicates)")
        if np.any(w <= 0):
            raise GridError("weights must be positive")
        b = np.zeros_like(x) if self.mult_b is None else np.asarray(self.mult_b, dtype=float).ravel()
        if b.shape != x.shape:
            raise GridError("multiplier b needs one value per node")
        v = np.zeros((x.size, 0), dtype=complex) if self.v is None else np.asarray(self.v, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != x.size:
            raise StructuralError(f"channel values have {v.shape[0]} rows for {x.size} nodes")
        m = v.shape[1]
        J = np.eye(m, dtype=complex) if self.J is None else np.asarray(self.J, dtype=complex)
        if J.ndim == 1:
            J = np.diag(J)
        if J.shape != (m, m):
            raise StructuralError(f"signature J must be {m}x{m}")
        for name, val in (("nodes", x), ("weights", w), ("mult_b", b), ("v", v), ("J", J)):
            object.__setattr__(self, name, val)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def sqrt_w(self) -> np.ndarray:
        return np.sqrt(self.weights)

    @classmethod
    def midpoint(cls, a: float, b: float, N: int, **kw) -> "GridModel":
        """Uniform midpoint rule on ``[a, b]`` (Lebesgue measure)."""
        h = (b - a) / N
        return cls(a + (np.arange(N) + 0.5) * h, np.full(N, h), **kw)


@dataclass(frozen=True)
class KernelOnGrid:
    """Samples ``K_ij = K(x_i, x_j)`` of a scalar kernel."""

    values: np.ndarray
    hermitian: bool = field(init=False)

    def __post_init__(self) -> None:
        K = np.asarray(self.values, dtype=complex)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise StructuralError(f"kernel samples must be square, got {K.shape}")
        object.__setattr__(self, "values", K)
        scale = max(1.0, opnorm(K))
        object.__setattr__(self, "hermitian", bool(np.max(np.abs(K - _herm(K)), initial=0.0) <= 1e-12 * scale))

    def weighted(self, g: GridModel) -> np.ndarray:
        """``sqrt(w_i) K_ij sqrt(w_j)``: the integral operator in orthonormal coordinates."""
        if self.values.shape[0] != g.size:
            raise StructuralError(f"kernel is {self.values.shape[0]}x{self.values.shape[0]}, grid has {g.size} nodes")
        s = g.sqrt_w
        return s[:, None] * self.values * s[None, :]


def kernel_from_channels(g: GridModel) -> KernelOnGrid:
    """``K(x, t) = sum v_alpha(x) J_{alpha beta} conj(v_beta(t))``."""
    return KernelOnGrid(g.v @ g.J @ _herm(g.v))


def channel_map(g: GridModel) -> np.ndarray:
    """``phi~`` in orthonormal coordinates: row ``beta``, column ``j`` is ``sqrt(w_j) conj(v_beta(x_j))``.

    With this map ``phi~^* J phi~`` is the weighted kernel of
    :func:`kernel_from_channels`.
    """
    return _herm(g.v) * g.sqrt_w[None, :]


def _require_hermitian(K: KernelOnGrid) -> None:
    if not K.hermitian:
        raise StructuralError("kernel must satisfy K(x, t)^* = K(t, x)")


def _per_node(values, g: GridModel, name: str) -> np.ndarray:
    if values is None:
        return np.zeros(g.size)
    arr = np.broadcast_to(np.asarray(values, dtype=float), (g.size,)).copy()
    return arr


def _hilbert_part(g: GridModel, K: KernelOnGrid) -> np.ndarray:
    """``H_ij = Kw_ij / (x_j - x_i)`` off the diagonal, zero on it (anti-Hermitian)."""
    Kw = K.weighted(g)
    diff = g.nodes[None, :] - g.nodes[:, None]
    np.fill_diagonal(diff, 1.0)
    H = Kw / diff
    np.fill_diagonal(H, 0.0)
    return H


def hilbert_root(g: GridModel, K: KernelOnGrid, n_mult=None) -> np.ndarray:
    """Self-adjoint solution of ``X T - T X = i K`` with ``T`` multiplication by ``x``.

    ``(X f)(x_i) = n(x_i) f(x_i) + i sum_{j != i} K(x_i, x_j) / (x_j - x_i) w_j f(x_j)``,
    returned in orthonormal coordinates.
    """
    _require_hermitian(K)
    n = _per_node(n_mult, g, "n_mult")
    return np.diag(n).astype(complex) + 1j * _hilbert_part(g, K)


@dataclass(frozen=True)
class ModelQuadruple:
    X: np.ndarray
    B: np.ndarray
    Y: np.ndarray
    A: np.ndarray


def model_quadruple(g: GridModel, K: KernelOnGrid, b_mult=None) -> ModelQuadruple:
    """Model operators in the spectral representation of the right root.

    ``X = diag(x)``, ``B = diag(b) - i H``, ``Y = diag(-b - x) + i H`` and
    ``A = Y X`` where ``H`` is the principal-value Hilbert-type matrix.
    ``b_mult`` defaults to the grid's ``mult_b``.
    """
    _require_hermitian(K)
    b = g.mult_b if b_mult is None else _per_node(b_mult, g, "b_mult")
    H = _hilbert_part(g, K)
    X = np.diag(g.nodes).astype(complex)
    B = np.diag(b).astype(complex) - 1j * H
    Y = np.diag(-b - g.nodes).astype(complex) + 1j * H
    return ModelQuadruple(X, B, Y, Y @ X)


def stieltjes_anticommutator(g: GridModel, K: KernelOnGrid) -> np.ndarray:
    """Solution of ``D T + T D = -K`` on a positive grid.

    ``(D f)(x_i) = -sum_j K(x_i, x_j) / (x_j + x_i) w_j f(x_j)`` in
    orthonormal coordinates.  It is the only Hermitian solution because
    ``x_i + x_j > 0`` for all pairs.
    """
    _require_hermitian(K)
    if np.any(g.nodes <= 0):
        raise PreconditionError("Stieltjes-type solution needs all nodes strictly positive")
    return -K.weighted(g) / (g.nodes[:, None] + g.nodes[None, :])


def anticommutator_nullity(g: GridModel) -> int:
    """Dimension of ``{N : N T + T N = 0}`` for ``T = diag(x)``.

    Entry ``N_ij`` is free exactly when ``x_i + x_j = 0``, so the count is
    the number of ordered mirror pairs (plus nodes at zero).
    """
    s = g.nodes[:, None] + g.nodes[None, :]
    scale = max(1.0, float(np.max(np.abs(g.nodes))))
    return int(np.count_nonzero(np.abs(s) <= PAIR_TOL * scale))


def mirror_pairs(g: GridModel) -> np.ndarray:
    """Index of the node at ``-x_i`` for each ``i`` (``-1`` when there is none)."""
    scale = max(1.0, float(np.max(np.abs(g.nodes))))
    out = np.full(g.size, -1, dtype=int)
    for i, x in enumerate(g.nodes):
        j = int(np.argmin(np.abs(g.nodes + x)))
        if abs(g.nodes[j] + x) <= PAIR_TOL * scale:
            out[i] = j
    return out


def anticommutator_general(g: GridModel, K: KernelOnGrid, m_mult=None) -> tuple[np.ndarray, np.ndarray]:
    """Solution of ``D T + T D = -K`` on a grid with nodes of both signs.

    ``(D f)(x) = m(x) f(-x) - sum K(x, t)/(t + x) w f(t)``.  The swap term
    acts only on mirror pairs ``x, -x`` (which must carry equal weights) and
    ``m`` must be real and even there.  Kernel entries with ``x_i + x_j = 0``
    cannot be matched and are excluded.

    Returns
    -------
    D : (N, N) complex array
        The solution in orthonormal coordinates.
    K_matched : (N, N) complex array
        The weighted kernel with the mirror-pair entries zeroed; the
        identity ``D T + T D = -K_matched`` holds exactly.
    """
    _require_hermitian(K)
    x = g.nodes
    scale = max(1.0, float(np.max(np.abs(x))))
    if np.any(np.abs(x) <= PAIR_TOL * scale):
        raise PreconditionError("nodes must avoid zero")
    m = _per_node(m_mult, g, "m_mult")
    mirror = mirror_pairs(g)
    N = g.size
    D = np.zeros((N, N), dtype=complex)
    for i in range(N):
        if m[i] == 0.0:
            continue
        j = mirror[i]
        if j < 0:
            raise PairingError(f"node {x[i]} carries a symmetric term but {-x[i]} is not on the grid")
        if not np.isclose(g.weights[i], g.weights[j], rtol=1e-12, atol=0):
            raise PairingError(f"mirror nodes {x[i]} and {x[j]} have different weights")
        if not np.isclose(m[j], m[i], rtol=1e-12, atol=PAIR_TOL):
            raise PairingError(f"symmetric multiplier must be even: m({x[i]}) != m({x[j]})")
        D[i, j] = m[i]
    Kw = K.weighted(g)
    s = x[:, None] + x[None, :]
    paired = np.abs(s) <= PAIR_TOL * scale
    s_safe = np.where(paired, 1.0, s)
    D = D - np.where(paired, 0.0, Kw / s_safe)
    K_matched = np.where(paired, 0.0, Kw)
    return D, K_matched
