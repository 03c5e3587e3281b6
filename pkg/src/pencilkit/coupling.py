"""Coupling of open systems, triangular root synthesis and scalar chains.

Coupling two pencils with a common channel space and signature gives

    A~ = [[A1, 0], [i phi2^* sigma phi1, A2]],   phi~ = [phi1, phi2],   B~ = diag(B1, B2),

and the characteristic functions multiply, ``S~ = S2 S1``.  Roots of the
coupled pencil are lower block triangular with an off-diagonal block that
solves a Sylvester equation.  A chain couples ``N`` scalar factors
``b_k, lam_k`` with ``lam_k - conj(lam_k) = i beta_k^2``; its continuous
limit is ``S = exp(-i int_0^l dt / (lam^2 + lam b(t) + a(t)))``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg

from .core import Colligation, PencilSystem, _herm, spectral_separation
from .errors import (
    CouplingIncompatibleError,
    NoUniqueSolutionError,
    NumericalError,
    SpectralPointError,
    ValidationError,
)
from .factor import FactoredPencil, factored_from_roots

__all__ = [
    "CoupledSystem",
    "ChainFactor",
    "ChainSpec",
    "ContinuousLimitSpec",
    "couple",
    "synthesize_roots",
    "chain_pencil",
    "chain_gamma",
    "chain_build",
    "blaschke_product_eval",
    "continuous_limit_eval",
    "adaptive_simpson",
]

GAMMA_DIVISOR_MIN = 1e-12


@dataclass(frozen=True)
class CoupledSystem:
    """Coupled pencil together with the two pencils it was built from."""

    system: PencilSystem
    parts: tuple[PencilSystem, PencilSystem]

    @property
    def colligation(self) -> Colligation:
        return self.system.colligation

    @property
    def B(self) -> np.ndarray:
        return self.system.B


def couple(p1: PencilSystem, p2: PencilSystem) -> CoupledSystem:
    """Couple ``p1`` (first) with ``p2`` (second).

    Raises CouplingIncompatibleError unless both systems share the channel
    dimension and have identical signatures.
    """
    m1, m2 = p1.colligation.dimE, p2.colligation.dimE
    if m1 != m2:
        raise CouplingIncompatibleError(f"channel dimensions differ ({m1} vs {m2})")
    if not np.array_equal(p1.sigma, p2.sigma):
        raise CouplingIncompatibleError("signatures differ; coupling needs sigma1 == sigma2")
    if p2.n == 0:
        return CoupledSystem(p1, (p1, p2))
    if p1.n == 0:
        return CoupledSystem(p2, (p1, p2))
    n1, n2 = p1.n, p2.n
    sigma = p1.sigma
    A = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    A[:n1, :n1] = p1.A
    A[n1:, n1:] = p2.A
    A[n1:, :n1] = 1j * _herm(p2.phi) @ sigma @ p1.phi
    phi = np.hstack([p1.phi, p2.phi])
    B = scipy.linalg.block_diag(p1.B, p2.B).astype(complex)
    return CoupledSystem(PencilSystem(Colligation(A, phi, sigma), B), (p1, p2))


def synthesize_roots(c: CoupledSystem, f1: FactoredPencil, f2: FactoredPencil) -> FactoredPencil:
    """Roots of the coupled pencil from roots of its parts.

    ``gamma`` solves ``Y2 gamma - gamma X1 = i phi2^* sigma phi1`` and
    ``X~ = [[X1, 0], [gamma, X2]]``, ``Y~ = [[Y1, 0], [-gamma, Y2]]``.
    """
    p1, p2 = c.parts
    if p1.n == 0:
        return f2
    if p2.n == 0:
        return f1
    sep = spectral_separation(f2.specY.eigenvalues, f1.specX.eigenvalues)
    if sep < 1e-12 * max(1.0, np.max(np.abs(f1.specX.eigenvalues)), np.max(np.abs(f2.specY.eigenvalues))):
        raise NoUniqueSolutionError(f"spec(Y2) and spec(X1) overlap (separation {sep:.3e})")
    rhs = 1j * _herm(p2.phi) @ p1.sigma @ p1.phi
    gamma = scipy.linalg.solve_sylvester(f2.Y, -f1.X, rhs)
    n1, n2 = p1.n, p2.n
    X = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    Y = np.zeros_like(X)
    X[:n1, :n1], X[n1:, n1:], X[n1:, :n1] = f1.X, f2.X, gamma
    Y[:n1, :n1], Y[n1:, n1:], Y[n1:, :n1] = f1.Y, f2.Y, -gamma
    return factored_from_roots(c.system, X, Y, method="synthesized")


@dataclass(frozen=True)
class ChainFactor:
    """Scalar factor ``S_k = (lam^2 + lam b + conj(lam_k)) / (lam^2 + lam b + lam_k)``."""

    b: float
    lam: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "lam", complex(self.lam))
        if not self.lam.imag > 0:
            raise ValidationError(f"chain factor needs Im(lam_k) > 0, got {self.lam}")

    @property
    def beta(self) -> float:
        return float(np.sqrt(2.0 * self.lam.imag))

    def roots(self) -> tuple[complex, complex]:
        """``(w1, w2)`` with ``w1`` in the upper and ``w2`` in the lower half-plane."""
        s = cmath.sqrt(self.b * self.b - 4.0 * self.lam)
        r1, r2 = (-self.b + s) / 2.0, (-self.b - s) / 2.0
        return (r1, r2) if r1.imag > r2.imag else (r2, r1)

    def value(self, z: complex) -> complex:
        den = z * z + z * self.b + self.lam
        if abs(den) <= 1e-300:
            raise SpectralPointError(f"{z} is a zero of lam^2 + {self.b} lam + {self.lam}")
        return (z * z + z * self.b + self.lam.conjugate()) / den


@dataclass(frozen=True)
class ChainSpec:
    factors: tuple[ChainFactor, ...]

    def __post_init__(self) -> None:
        fs = tuple(f if isinstance(f, ChainFactor) else ChainFactor(*f) for f in self.factors)
        object.__setattr__(self, "factors", fs)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, complex]]) -> "ChainSpec":
        return cls(tuple(ChainFactor(b, lam) for b, lam in pairs))

    @property
    def N(self) -> int:
        return len(self.factors)

    @property
    def b(self) -> np.ndarray:
        return np.array([f.b for f in self.factors])

    @property
    def lams(self) -> np.ndarray:
        return np.array([f.lam for f in self.factors])

    @property
    def betas(self) -> np.ndarray:
        return np.array([f.beta for f in self.factors])


def chain_pencil(spec: ChainSpec) -> PencilSystem:
    """Coupled chain pencil: ``B~ = diag(b_k)``, ``A~`` lower triangular with ``i beta_s beta_k`` below the diagonal."""
    beta = spec.betas
    A = np.diag(spec.lams).astype(complex) + 1j * np.tril(np.outer(beta, beta), -1)
    phi = beta.astype(complex)[None, :]
    return PencilSystem(Colligation(A, phi, np.eye(1, dtype=complex)), np.diag(spec.b).astype(complex))


def chain_gamma(spec: ChainSpec) -> np.ndarray:
    """Strictly lower-triangular ``gamma`` of the chain roots, filled by sub-diagonals.

    ``(w2^k - w1^s) gamma_{k,s} = i beta_s beta_k + sum_{s<l<k} gamma_{k,l} gamma_{l,s}``.
    """
    N = spec.N
    beta = spec.betas
    w = [f.roots() for f in spec.factors]
    g = np.zeros((N, N), dtype=complex)
    for d in range(1, N):
        for s in range(N - d):
            k = s + d
            div = w[k][1] - w[s][0]
            if abs(div) <= GAMMA_DIVISOR_MIN:
                raise NumericalError(f"root collision w2^{k + 1} = w1^{s + 1}")
            acc = 1j * beta[s] * beta[k] + np.dot(g[k, s + 1 : k], g[s + 1 : k, s])
            g[k, s] = acc / div
    return g


def chain_build(spec: ChainSpec) -> tuple[PencilSystem, FactoredPencil]:
    """Chain pencil and its triangular roots ``X~ = diag(w1) + gamma``, ``Y~ = diag(w2) - gamma``."""
    p = chain_pencil(spec)
    g = chain_gamma(spec)
    w1 = np.array([f.roots()[0] for f in spec.factors])
    w2 = np.array([f.roots()[1] for f in spec.factors])
    X = np.diag(w1) + g
    Y = np.diag(w2) - g
    return p, factored_from_roots(p, X, Y, method="chain")


def blaschke_product_eval(spec: ChainSpec, lam: complex) -> complex:
    """``prod_k (lam^2 + lam b_k + conj(lam_k)) / (lam^2 + lam b_k + lam_k)``."""
    lam = complex(lam)
    out = 1.0 + 0.0j
    for f in spec.factors:
        out *= f.value(lam)
    return out


Sampled = Union[Callable[[np.ndarray], np.ndarray], Sequence[float], np.ndarray]


def _as_function(values: Sampled, l: float) -> Callable[[np.ndarray], np.ndarray]:
    """Callables pass through; arrays are uniform samples on ``[0, l]``, linearly interpolated."""
    if callable(values):
        def fn(t):
            t = np.asarray(t, dtype=float)
            return np.broadcast_to(np.asarray(values(t), dtype=float), t.shape)

        return fn
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValidationError("sampled function needs at least one value")
    if arr.size == 1:
        return lambda t: np.full(np.shape(t), arr[0])
    grid = np.linspace(0.0, l, arr.size)
    return lambda t: np.interp(t, grid, arr)


@dataclass(frozen=True)
class ContinuousLimitSpec:
    """Length ``l`` and real bounded functions ``b(t)``, ``a(t)`` on ``[0, l]``.

    ``b`` and ``a`` may be callables or arrays of uniform samples over
    ``[0, l]`` (interpolated linearly).
    """

    l: float
    b: Sampled
    a: Sampled

    def __post_init__(self) -> None:
        if not (np.isfinite(self.l) and self.l >= 0):
            raise ValidationError("length l must be finite and non-negative")
        object.__setattr__(self, "l", float(self.l))

    def b_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        return _as_function(self.b, self.l)

    def a_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        return _as_function(self.a, self.l)


def adaptive_simpson(fn: Callable[[float], complex], lo: float, hi: float, tol: float = 1e-10, max_depth: int = 48) -> complex:
    """Adaptive Simpson quadrature of a complex scalar function (absolute tolerance)."""
    if hi == lo:
        return 0.0j
    f_lo, f_hi = fn(lo), fn(hi)
    mid = 0.5 * (lo + hi)
    f_mid = fn(mid)
    whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
    total = 0.0j
    # explicit stack avoids deep recursion
    stack = [(lo, hi, f_lo, f_mid, f_hi, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, S, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - S
        if depth >= max_depth or abs(err) <= 15.0 * eps:
            total += left + right + err / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, eps / 2.0, depth + 1))
            stack.append((m, b, fm, frm, fb, right, eps / 2.0, depth + 1))
    return total


def continuous_limit_eval(spec: ContinuousLimitSpec, lam: complex, tol: float = 1e-10) -> complex:
    """``exp(-i int_0^l dt / (lam^2 + lam b(t) + a(t)))`` by adaptive Simpson."""
    lam = complex(lam)
    if spec.l == 0.0:
        return 1.0 + 0.0j
    bf, af = spec.b_fn(), spec.a_fn()
    probe = np.linspace(0.0, spec.l, 257)
    den = lam * lam + lam * bf(probe) + af(probe)
    scale = max(1.0, abs(lam) ** 2)
    if np.min(np.abs(den)) <= 1e-12 * scale:
        raise SpectralPointError(f"lam^2 + lam b(t) + a(t) vanishes on [0, l] at lam={lam}")

    def integrand(t: float) -> complex:
        d = lam * lam + lam * float(bf(np.array([t]))[0]) + float(af(np.array([t]))[0])
        if abs(d) <= 1e-12 * scale:
            raise SpectralPointError(f"integrand singular at t={t}")
        return 1.0 / d

    exponent = adaptive_simpson(integrand, 0.0, spec.l, tol)
    return complex(np.exp(-1j * exponent))
