"""Volterra model of the continuous chain on ``L^2(0, l)``.

The operators are ``(B f)(x) = b(x) f(x)`` and
``(A f)(x) = a(x) f(x) + i int_0^x f(t) dt`` with ``phi f = int_0^l f`` and
``sigma = 1``.  Discretization uses ``N`` midpoint cells of width ``h`` and
the midpoint rule for the running integral, with half weight on the
diagonal:

    A~ = diag(a_i + i h/2) + i h * (strictly lower ones),   phi~ = sqrt(h) [1 ... 1].

This is exactly a chain of ``N`` scalar factors with ``beta_k^2 = h`` and
``lam_k = a_k + i h/2``, so the defect identity holds to rounding and the
triangular roots come from the chain recursion.  The roots have the form
``X = diag(w1) + i h K``, ``Y = diag(w2) - i h K`` with a lower-triangular
kernel ``K(x, t)`` that solves

    [w2(x) - w1(t)] K(x, t) - i int_t^x K(x, s) K(s, t) ds = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..charfn import char_fn
from ..core import Colligation, PencilSystem, opnorm
from ..coupling import ChainFactor, ChainSpec, ContinuousLimitSpec, adaptive_simpson, chain_gamma
from ..errors import KernelSingularError, ValidationError
from ..factor import FactoredPencil, factored_from_roots

__all__ = [
    "VolterraModel",
    "volterra_build",
    "continuous_roots",
    "closed_form_kernel",
    "kernel_equation_residual",
]

DEGENERACY_TOL = 1e-10


def continuous_roots(b, a) -> tuple[np.ndarray, np.ndarray]:
    """Roots ``w1, w2`` of ``w^2 + b w + a = 0`` for real ``b``, ``a``.

    ``w1`` is the limit of the upper-half-plane root when ``a`` gets a small
    positive imaginary part: the upper root for complex pairs and the
    smaller root for real pairs.
    """
    b = np.asarray(b, dtype=float)
    a = np.asarray(a, dtype=float)
    disc = b * b - 4.0 * a
    s = np.sqrt(disc.astype(complex))  # real for disc >= 0, +i|.| otherwise
    w1 = np.where(disc >= 0, (-b - s) / 2.0, (-b + s) / 2.0)
    w2 = -b - w1
    return w1.astype(complex), w2.astype(complex)


@dataclass(frozen=True)
class VolterraModel:
    """Discretized Volterra model on ``N`` midpoint cells of ``[0, l]``."""

    nodes: np.ndarray
    h: float
    a: np.ndarray
    b: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    A: np.ndarray
    B: np.ndarray
    phi: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    kernel: np.ndarray

    @property
    def N(self) -> int:
        return self.nodes.size

    def pencil(self) -> PencilSystem:
        return PencilSystem(Colligation(self.A, self.phi, np.eye(1, dtype=complex)), self.B)

    def factored(self) -> FactoredPencil:
        return factored_from_roots(self.pencil(), self.X, self.Y, method="chain")

    def char_fn(self, lam: complex) -> complex:
        return complex(char_fn(self.pencil(), lam)[0, 0])

    def chain_spec(self) -> ChainSpec:
        return ChainSpec(tuple(ChainFactor(bk, ak + 0.5j * self.h) for bk, ak in zip(self.b, self.a)))

    def residuals(self) -> dict[str, float]:
        return {
            "sum": opnorm(self.X + self.Y + self.B),
            "product": opnorm(self.Y @ self.X - self.A),
            "vieta_sum": float(np.max(np.abs(self.w1 + self.w2 + self.b))),
            "vieta_product": float(np.max(np.abs(self.w1 * self.w2 - self.a))),
        }


def volterra_build(spec: ContinuousLimitSpec, N: int) -> VolterraModel:
    """Model matrices, roots and kernel on ``N`` midpoint cells.

    Raises KernelSingularError when ``w1(x) = w2(x)`` at some node, i.e.
    ``b(x)^2 = 4 a(x)``.
    """
    if N < 1:
        raise ValidationError("need at least one cell")
    if spec.l <= 0:
        raise ValidationError("Volterra model needs l > 0")
    h = spec.l / N
    x = (np.arange(N) + 0.5) * h
    b = np.asarray(spec.b_fn()(x), dtype=float)
    a = np.asarray(spec.a_fn()(x), dtype=float)
    w1, w2 = continuous_roots(b, a)
    gap = np.abs(w2 - w1)
    scale = np.maximum(1.0, np.abs(b) + np.sqrt(np.abs(a)))
    bad = np.nonzero(gap <= DEGENERACY_TOL * scale)[0]
    if bad.size:
        raise KernelSingularError(f"w1 = w2 (b^2 = 4a) at x = {x[bad[0]]:.6g}")
    chain = ChainSpec(tuple(ChainFactor(bk, ak + 0.5j * h) for bk, ak in zip(b, a)))
    roots = [f.roots() for f in chain.factors]
    gamma = chain_gamma(chain)
    X = np.diag([r[0] for r in roots]) + gamma
    Y = np.diag([r[1] for r in roots]) - gamma
    A = np.diag(a + 0.5j * h) + 1j * h * np.tril(np.ones((N, N)), -1)
    B = np.diag(b).astype(complex)
    phi = np.full((1, N), np.sqrt(h), dtype=complex)
    kernel = gamma / (1j * h)
    # the diagonal of the kernel is K(x, x) = 1/(w2 - w1)
    kernel[np.diag_indices(N)] = 1.0 / (w2 - w1)
    return VolterraModel(x, h, a, b, w1, w2, A.astype(complex), B, phi, X, Y, kernel)


def kernel_equation_residual(model: VolterraModel) -> float:
    """Max over grid pairs ``i >= j`` of the kernel-equation residual.

    Uses the continuous roots and the trapezoid rule on the nodes between
    ``t_j`` and ``x_i`` for the integral term.
    """
    K, h, w1, w2 = model.kernel, model.h, model.w1, model.w2
    N = model.N
    worst = 0.0
    for i in range(N):
        for j in range(i + 1):
            if i == j:
                integral = 0.0
            else:
                vals = K[i, j : i + 1] * K[j : i + 1, j]
                integral = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
            r = (w2[i] - w1[j]) * K[i, j] - 1j * integral - 1.0
            worst = max(worst, abs(r))
    return worst


def closed_form_kernel(spec: ContinuousLimitSpec, x: float, t: float, tol: float = 1e-12) -> complex:
    """``{w2(x) - w1(t) - i int_t^x ds / (w2(s) - w1(s))}^{-1}``.

    Built from the diagonal condition ``K(x, x) = 1/(w2(x) - w1(x))`` and
    the separable ansatz.  It matches the kernel at ``x = t`` but is not an
    exact solution of the kernel equation off the diagonal, which is why the
    model kernel is computed from the discrete recursion instead.
    """
    bf, af = spec.b_fn(), spec.a_fn()

    def inv_gap(s: float) -> complex:
        w1, w2 = continuous_roots(bf(np.array([s])), af(np.array([s])))
        return complex(1.0 / (w2[0] - w1[0]))

    w1x, w2x = continuous_roots(bf(np.array([x])), af(np.array([x])))
    w1t, w2t = continuous_roots(bf(np.array([t])), af(np.array([t])))
    integral = adaptive_simpson(inv_gap, t, x, tol) if x != t else 0.0
    return complex(1.0 / (w2x[0] - w1t[0] - 1j * integral))
