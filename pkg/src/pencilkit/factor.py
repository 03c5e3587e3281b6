"""Spectral factorization ``L(lam) = (lam I - Y)(lam I - X)`` and the coupling operator.

Two routes to the right root ``X``:

* :func:`factor_spectral` takes an invariant subspace of the companion
  linearization for a chosen half of the pencil spectrum.  The subspace is
  the graph ``{col[h, X h]}`` whenever the split is admissible.
* :func:`factor_bernoulli` runs the fixed-point iteration
  ``X <- -B^{-1}(A + X^2)``, which converges under the smallness condition
  ``4 ||B^{-1}|| ||B^{-1} A|| < 1``.

Given roots with disjoint spectra, the coupling operator ``K`` is the unique
solution of ``K Y - X K = I``.  It is also the contour integral of
``L^{-1}`` around ``spec(Y)``, which :func:`coupling_K_contour` evaluates
independently by trapezoidal quadrature on a circle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .core import (
    PencilSystem,
    SpectrumInfo,
    _checked_inverse,
    _pencil_inverse,
    as_cmatrix,
    opnorm,
    spectral_separation,
)
from .errors import (
    ContourInvalidError,
    DivergenceError,
    FactorizationInfeasibleError,
    NoUniqueSolutionError,
    PreconditionError,
    SpectralPointError,
    SplitInvalidError,
    ValidationError,
)

__all__ = [
    "FactoredPencil",
    "ContourSpec",
    "IdentityReport",
    "SPLIT_RULES",
    "factor_spectral",
    "factor_bernoulli",
    "factored_from_roots",
    "coupling_K_sylvester",
    "coupling_K_contour",
    "contour_quadrature",
    "default_contour",
    "verify_identities",
    "pencil_scale",
]

SEP_MIN = 1e-8
GRAPH_COND_LIMIT = 1e12
ROOT_TOL = 1e-8

SplitRule = Union[str, Callable[[complex], bool]]
SPLIT_RULES = ("gap", "halfplane-re", "halfplane-im", "modulus")


def pencil_scale(p: PencilSystem) -> float:
    """Natural magnitude of ``L`` entries, used to make tolerances relative."""
    return max(1.0, opnorm(p.A), opnorm(p.B) ** 2)


@dataclass(frozen=True)
class FactoredPencil:
    pencil: PencilSystem
    X: np.ndarray
    Y: np.ndarray
    K: np.ndarray
    specX: SpectrumInfo
    specY: SpectrumInfo
    method: str

    @property
    def B(self) -> np.ndarray:
        return self.pencil.B

    @property
    def A(self) -> np.ndarray:
        return self.pencil.A

    @property
    def separation(self) -> float:
        return self.specX.separation

    def residuals(self) -> dict[str, float]:
        X, Y, K, A, B = self.X, self.Y, self.K, self.A, self.B
        eye = np.eye(X.shape[0])
        return {
            "sum": opnorm(X + Y + B),
            "product": opnorm(Y @ X - A),
            "right_root": opnorm(X @ X + B @ X + A),
            "left_root": opnorm(Y @ Y + Y @ B + A),
            "sylvester": opnorm(K @ Y - X @ K - eye),
        }


@dataclass(frozen=True)
class ContourSpec:
    """Circle ``|z - center| = radius`` sampled at ``nodes`` equispaced points."""

    center: complex
    radius: float
    nodes: int = 64

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("contour radius must be positive")
        if self.nodes < 16:
            raise ValueError("contour needs at least 16 nodes")

    def points(self, nodes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Nodes ``z_j`` and trapezoid weights ``dz_j / (2 pi i)``."""
        N = self.nodes if nodes is None else nodes
        theta = 2.0 * np.pi * np.arange(N) / N
        e = np.exp(1j * theta)
        z = self.center + self.radius * e
        # dz/(2 pi i) = r e^{i theta} d theta / (2 pi)
        return z, self.radius * e / N

    def encloses(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius


@dataclass(frozen=True)
class IdentityReport:
    lam: complex
    resolvent_identity: float
    left_equation: float


def _sylvester_K(X: np.ndarray, Y: np.ndarray, separation: float) -> np.ndarray:
    if X.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    if not separation > 0 or separation < 1e3 * np.finfo(float).eps * max(1.0, opnorm(X), opnorm(Y)):
        raise NoUniqueSolutionError(f"spectra of X and Y overlap (separation {separation:.3e})")
    # -X K + K Y = I
    return scipy.linalg.solve_sylvester(-X, Y, np.eye(X.shape[0], dtype=complex))


def factored_from_roots(p: PencilSystem, X, Y=None, method: str = "given", sep_min: float = SEP_MIN) -> FactoredPencil:
    """Package a right root ``X`` (and optionally ``Y``) with its coupling operator.

    ``Y`` defaults to ``-B - X``.  Raises ValidationError unless
    ``X + Y = -B`` and ``Y X = A`` hold to ``ROOT_TOL`` relative to the pencil
    scale, and FactorizationInfeasibleError when the two spectra are closer
    than ``sep_min``.
    """
    n = p.n
    X = as_cmatrix(X, "X", (n, n))
    Y = -p.B - X if Y is None else as_cmatrix(Y, "Y", (n, n))
    scale = max(pencil_scale(p), opnorm(X) ** 2, opnorm(Y) ** 2)
    bad = max(opnorm(X + Y + p.B), opnorm(Y @ X - p.A))
    if bad > ROOT_TOL * scale:
        raise ValidationError(f"X, Y do not factor the pencil (residual {bad:.3e})")
    ex = np.linalg.eigvals(X) if X.size else np.zeros(0, dtype=complex)
    ey = np.linalg.eigvals(Y) if Y.size else np.zeros(0, dtype=complex)
    sep = spectral_separation(ex, ey)
    if sep < sep_min:
        raise FactorizationInfeasibleError(f"spectral separation {sep:.3e} below {sep_min:.1e}")
    K = _sylvester_K(X, Y, sep)
    return FactoredPencil(
        pencil=p,
        X=X,
        Y=Y,
        K=K,
        specX=SpectrumInfo(tuple(complex(z) for z in ex), sep),
        specY=SpectrumInfo(tuple(complex(z) for z in ey), sep),
        method=method,
    )


def _selector(eigs: np.ndarray, n: int, rule: SplitRule, shift: float, sep_min: float = SEP_MIN) -> Callable[[complex], bool]:
    """Predicate picking the eigenvalues that go to ``X``."""
    if callable(rule):
        return rule
    if rule == "gap":
        re = np.sort(eigs.real)[::-1]
        lo, hi = re[n], re[n - 1]
        if hi - lo < sep_min:
            raise FactorizationInfeasibleError(
                f"no real-part gap between the upper and lower halves of the spectrum (gap {hi - lo:.3e})"
            )
        c = 0.5 * (hi + lo)
        return lambda z: z.real > c
    if rule == "halfplane-re":
        return lambda z: z.real > shift
    if rule == "halfplane-im":
        return lambda z: z.imag > shift
    if rule == "modulus":
        mod = np.sort(np.abs(eigs))
        if mod[n] - mod[n - 1] < sep_min:
            raise FactorizationInfeasibleError("no modulus gap between the two halves of the spectrum")
        c = 0.5 * (mod[n] + mod[n - 1])
        return lambda z: abs(z) < c
    raise ValueError(f"unknown split rule {rule!r}; expected one of {SPLIT_RULES} or a callable")


def factor_spectral(
    p: PencilSystem,
    split_rule: SplitRule = "gap",
    *,
    shift: float = 0.0,
    complement: bool = False,
    sep_min: float = SEP_MIN,
) -> FactoredPencil:
    """Right root from an invariant subspace of the companion linearization.

    Parameters
    ----------
    p : PencilSystem
    split_rule : {"gap", "halfplane-re", "halfplane-im", "modulus"} or callable
        Which half of the ``2n`` pencil eigenvalues becomes ``spec(X)``.
        ``"gap"`` gives ``X`` the ``n`` eigenvalues of largest real part,
        ``"halfplane-re"``/``"halfplane-im"`` those with real/imaginary part
        above ``shift``, ``"modulus"`` the ``n`` of smallest modulus.  A
        callable receives one eigenvalue and returns True for ``X``.
    complement : bool
        Swap the roles of the two halves.
    """
    n = p.n
    if n == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return FactoredPencil(p, empty, empty, empty, SpectrumInfo(()), SpectrumInfo(()), "schur-split")
    C = p.companion()
    eigs = np.linalg.eigvals(C)
    pick = _selector(eigs, n, split_rule, shift, sep_min)
    select = (lambda z: not pick(z)) if complement else pick
    chosen = int(sum(bool(select(z)) for z in eigs))
    if chosen != n:
        raise FactorizationInfeasibleError(f"split rule selects {chosen} of {2 * n} eigenvalues, need exactly {n}")
    T, Z, sdim = scipy.linalg.schur(C, output="complex", sort=lambda z: bool(select(z)))
    if sdim != n:
        raise FactorizationInfeasibleError(f"reordered Schur form selected {sdim} eigenvalues, need {n}")
    Q1, Q2 = Z[:n, :n], Z[n:, :n]
    cond = np.linalg.cond(Q1)
    if not np.isfinite(cond) or cond > GRAPH_COND_LIMIT:
        raise SplitInvalidError(f"invariant subspace is not a graph (basis block condition {cond:.3e})")
    X = np.linalg.solve(Q1.T, Q2.T).T
    return factored_from_roots(p, X, method="schur-split", sep_min=sep_min)


def factor_bernoulli(
    p: PencilSystem,
    max_iter: int = 10000,
    tol: float = 1e-13,
    sep_min: float = SEP_MIN,
) -> FactoredPencil:
    """Small root by the iteration ``X_{k+1} = -B^{-1}(A + X_k^2)`` from ``X_0 = 0``.

    Refuses to run unless ``B`` is invertible and
    ``4 ||B^{-1}|| ||B^{-1} A|| < 1``.  ``tol`` is relative to ``max(1, ||B||)``.
    """
    B, A = p.B, p.A
    try:
        Binv = _checked_inverse(B, "B")
    except SpectralPointError:
        raise PreconditionError("B is not invertible") from None
    q = 4.0 * opnorm(Binv) * opnorm(Binv @ A)
    if not q < 1.0:
        raise PreconditionError(f"4||B^-1|| ||B^-1 A|| = {q:.4f} is not below 1")
    BinvA = Binv @ A
    X = np.zeros_like(A)
    atol = tol * max(1.0, opnorm(B))
    for _ in range(max_iter):
        X_new = -BinvA - Binv @ (X @ X)
        step = opnorm(X_new - X)
        X = X_new
        if step <= atol:
            return factored_from_roots(p, X, method="bernoulli", sep_min=sep_min)
    raise DivergenceError(f"Bernoulli iteration did not converge in {max_iter} steps (last step {step:.3e})")


def coupling_K_sylvester(f: FactoredPencil) -> np.ndarray:
    """Unique solution of ``K Y - X K = I`` (Bartels-Stewart)."""
    sep = spectral_separation(f.specX.eigenvalues, f.specY.eigenvalues)
    return _sylvester_K(f.X, f.Y, sep)


def default_contour(f: FactoredPencil, enclose: str = "Y", nodes: int = 64) -> ContourSpec:
    """Circle around ``spec(Y)`` (or ``spec(X)``) that excludes the other root's spectrum.

    Centered at the mean of the enclosed eigenvalues with radius 1.5x their
    spread.  Singletons, or clusters where that radius would swallow an
    excluded eigenvalue, fall back to the geometric mean of the enclosed
    spread and the distance to the nearest excluded eigenvalue.
    """
    inside = np.asarray(f.specY.eigenvalues if enclose == "Y" else f.specX.eigenvalues)
    outside = np.asarray(f.specX.eigenvalues if enclose == "Y" else f.specY.eigenvalues)
    center = complex(np.mean(inside))
    r_in = float(np.max(np.abs(inside - center)))
    r_out = float(np.min(np.abs(outside - center))) if outside.size else np.inf
    if not r_out > r_in:
        raise ContourInvalidError("no circle centered at the cluster mean separates the two spectra")
    radius = 1.5 * r_in
    if r_in == 0.0:
        radius = 0.5 * r_out if np.isfinite(r_out) else 1.0
    elif not radius < r_out / 1.5:
        radius = np.sqrt(r_in * r_out)
    return ContourSpec(center, radius, nodes)


def _check_contour(f: FactoredPencil, gamma: ContourSpec) -> np.ndarray:
    """Expected integral for ``gamma``: ``K``, ``-K`` or 0 by which spectra it encloses."""
    ex = np.asarray(f.specX.eigenvalues)
    ey = np.asarray(f.specY.eigenvalues)
    margin = 1e-8 * max(1.0, gamma.radius)
    for z in np.concatenate([ex, ey]):
        if abs(abs(z - gamma.center) - gamma.radius) <= margin:
            raise ContourInvalidError(f"contour passes through eigenvalue {z}")
    ix, iy = gamma.encloses(ex), gamma.encloses(ey)
    if (ix.any() and not ix.all()) or (iy.any() and not iy.all()):
        raise ContourInvalidError("contour splits a root spectrum; enclose all of spec(X) or spec(Y) or neither")
    target = np.zeros_like(f.K)
    if iy.all() and iy.size:
        target = target + f.K
    if ix.all() and ix.size:
        target = target - f.K
    return target


def contour_quadrature(p: PencilSystem, gamma: ContourSpec, nodes: int | None = None) -> np.ndarray:
    """Trapezoidal approximation of ``(1/2 pi i) \\oint L^{-1}(z) dz`` on a circle."""
    z, w = gamma.points(nodes)
    total = np.zeros((p.n, p.n), dtype=complex)
    for zj, wj in zip(z, w):
        try:
            Rj = _pencil_inverse(p.B, p.A, zj, "L on contour")
        except SpectralPointError as exc:
            raise ContourInvalidError(str(exc)) from None
        total += wj * Rj
    return total


def coupling_K_contour(
    f: FactoredPencil,
    gamma: ContourSpec | None = None,
    quad_tol: float = 1e-10,
    max_nodes: int = 4096,
) -> np.ndarray:
    """Contour-integral coupling operator with node doubling.

    Starting from ``gamma.nodes``, the node count doubles until the result is
    within ``quad_tol * max(1, ||K||)`` of the value implied by the enclosed
    spectra (``K`` around ``spec(Y)``, ``-K`` around ``spec(X)``, 0 around
    neither) or ``max_nodes`` is reached.
    """
    if gamma is None:
        gamma = default_contour(f)
    target = _check_contour(f, gamma)
    atol = quad_tol * max(1.0, opnorm(f.K))
    nodes = gamma.nodes
    while True:
        K = contour_quadrature(f.pencil, gamma, nodes)
        err = opnorm(K - target)
        if err <= atol:
            return K
        if nodes * 2 > max_nodes:
            warnings.warn(f"contour quadrature stopped at {nodes} nodes with error {err:.3e}", RuntimeWarning)
            return K
        nodes *= 2


def verify_identities(f: FactoredPencil, lam: complex) -> IdentityReport:
    """Residuals of ``K(lam-Y)^{-1} - (lam-X)^{-1}K = L^{-1}(lam)`` and ``KY^2 + BKY + AK = 0``."""
    lam = complex(lam)
    n = f.X.shape[0]
    eye = np.eye(n, dtype=complex)
    RX = _checked_inverse(lam * eye - f.X, "lam I - X")
    RY = _checked_inverse(lam * eye - f.Y, "lam I - Y")
    L_inv = _pencil_inverse(f.B, f.A, lam, "L(lam)")
    K = f.K
    res1 = opnorm(K @ RY - RX @ K - L_inv)
    res2 = opnorm(K @ f.Y @ f.Y + f.B @ K @ f.Y + f.A @ K)
    return IdentityReport(lam, res1, res2)
