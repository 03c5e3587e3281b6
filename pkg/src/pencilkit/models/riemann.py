"""Scalar characteristic function through a Riemann boundary problem.

Data on an interval ``[a, b]``: a channel function ``v(x)``, a multiplier
``b(x)`` and a sign ``J``.  With

    zeta(x) = lam + x + b(x),   omega(x) = J |v(x)|^2,   d(x) = (zeta - pi omega) / (zeta + pi omega),

the canonical function of the boundary problem is
``X(lam) = exp((1/2 pi i) int ln d(t) / (t - lam) dt)`` with boundary value
``Gamma_+(x) = ln d(x) / 2 + (1/2 pi i) PV int ln d(t) / (t - x) dt``.  The
characteristic function is then

    S(lam) = 1 + i X(lam) int omega(x) e^{-Gamma_+(x)} / (zeta(x) + pi omega(x)) dx / (x - lam),

taking the polynomial part of the general solution to be zero.  The direct
route builds the discrete model pair on a midpoint grid and evaluates
``1 - i phi L^{-1} phi^* J`` for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import BoundaryProblemUndefinedError, ValidationError
from .grid import GridModel, _hilbert_part, channel_map, kernel_from_channels

__all__ = ["RiemannProblemData", "riemann_charfn_scalar", "direct_charfn_scalar", "direct_model_pair"]

ADMISSIBLE_TOL = 1e-12


def _vectorize(fn, dtype) -> Callable[[np.ndarray], np.ndarray]:
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(fn(x), dtype=dtype), x.shape)

    return wrapped


@dataclass(frozen=True)
class RiemannProblemData:
    """Scalar boundary-problem data on ``[a, b]``.

    ``v`` and ``mult_b`` are callables of ``x`` (vectorized).  ``n_quad`` is
    the number of Gauss-Legendre nodes used for every integral.
    """

    a: float
    b: float
    v: Callable[[np.ndarray], np.ndarray]
    mult_b: Callable[[np.ndarray], np.ndarray]
    J: float = 1.0
    n_quad: int = 256

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValidationError("interval must satisfy a < b")
        if self.J not in (1, -1, 1.0, -1.0):
            raise ValidationError("J must be +1 or -1")
        if self.n_quad < 8:
            raise ValidationError("n_quad must be at least 8")
        object.__setattr__(self, "v", _vectorize(self.v, complex))
        object.__setattr__(self, "mult_b", _vectorize(self.mult_b, float))

    @classmethod
    def from_samples(cls, x, v, mult_b, J: float = 1.0, n_quad: int = 256) -> "RiemannProblemData":
        """Data from samples, linearly interpolated; the interval is ``[x[0], x[-1]]``."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=complex)
        mb = np.broadcast_to(np.asarray(mult_b, dtype=float), x.shape)
        if v.shape != x.shape or np.any(np.diff(x) <= 0):
            raise ValidationError("samples need increasing x and one v value per x")
        vf = lambda t: np.interp(t, x, v.real) + 1j * np.interp(t, x, v.imag)  # noqa: E731
        bf = lambda t: np.interp(t, x, mb)  # noqa: E731
        return cls(float(x[0]), float(x[-1]), vf, bf, J, n_quad)

    def omega(self, x) -> np.ndarray:
        return self.J * np.abs(self.v(x)) ** 2

    def zeta(self, x, lam: complex) -> np.ndarray:
        return lam + np.asarray(x, dtype=float) + self.mult_b(x)

    def d(self, x, lam: complex) -> np.ndarray:
        z, om = self.zeta(x, lam), np.pi * self.omega(x)
        return (z - om) / (z + om)

    def check_admissible(self, lam: complex) -> None:
        lam = complex(lam)
        scale = max(1.0, abs(lam), abs(self.a), abs(self.b))
        if abs(lam.imag) <= ADMISSIBLE_TOL * scale and self.a <= lam.real <= self.b:
            raise BoundaryProblemUndefinedError(f"lam={lam} lies on the support [{self.a}, {self.b}]")
        x = np.linspace(self.a, self.b, 4 * self.n_quad + 1)
        z, om = self.zeta(x, lam), np.pi * self.omega(x)
        if min(np.min(np.abs(z - om)), np.min(np.abs(z + om))) <= ADMISSIBLE_TOL * scale:
            raise BoundaryProblemUndefinedError(f"zeta +- pi omega vanishes on the support at lam={lam}")


def _log_d(r: RiemannProblemData, x: np.ndarray, lam: complex) -> np.ndarray:
    """Continuous logarithm of ``d`` along increasing ``x``, anchored at the principal branch at ``x[0]``."""
    d = r.d(x, lam)
    ang = np.unwrap(np.angle(d))
    return np.log(np.abs(d)) + 1j * ang


def riemann_charfn_scalar(r: RiemannProblemData, lam: complex) -> complex:
    """Characteristic function from the boundary-problem solution.

    Principal values use the subtraction
    ``PV int g(t)/(t - x) dt = int (g(t) - g(x))/(t - x) dt + g(x) ln((b - x)/(x - a))``
    on Gauss-Legendre nodes, with the diagonal term ``g'(x) w`` from a
    central difference of ``d``.
    """
    lam = complex(lam)
    r.check_admissible(lam)
    if not np.any(r.omega(np.linspace(r.a, r.b, 2 * r.n_quad + 1))):
        return 1.0 + 0.0j
    t, wt = leggauss(r.n_quad)
    half = 0.5 * (r.b - r.a)
    x = half * t + 0.5 * (r.a + r.b)
    w = half * wt
    g = _log_d(r, x, lam)
    z, om = r.zeta(x, lam), r.omega(x)

    diff = x[None, :] - x[:, None]
    np.fill_diagonal(diff, 1.0)
    M = (g[None, :] - g[:, None]) / diff
    eps = 1e-6 * max(1.0, half)
    dprime = (r.d(x + eps, lam) - r.d(x - eps, lam)) / (2 * eps)
    np.fill_diagonal(M, dprime / r.d(x, lam))
    pv = M @ w + g * np.log((r.b - x) / (x - r.a))

    gamma_lam = np.sum(w * g / (x - lam)) / (2j * np.pi)
    gamma_plus = 0.5 * g + pv / (2j * np.pi)
    integrand = om * np.exp(-gamma_plus) / (z + np.pi * om) / (x - lam)
    return complex(1.0 + 1j * np.exp(gamma_lam) * np.sum(w * integrand))


def direct_model_pair(r: RiemannProblemData, N: int) -> tuple[GridModel, np.ndarray, np.ndarray, np.ndarray]:
    """Midpoint grid, ``X = diag(x)``, ``Y = -diag(x + b) + i H`` and the channel row."""
    x = r.a + (np.arange(N) + 0.5) * (r.b - r.a) / N
    g = GridModel(x, np.full(N, (r.b - r.a) / N), mult_b=r.mult_b(x), v=r.v(x), J=[r.J])
    H = _hilbert_part(g, kernel_from_channels(g))
    X = np.diag(x).astype(complex)
    Y = -np.diag(x + g.mult_b).astype(complex) + 1j * H
    return g, X, Y, channel_map(g)


def direct_charfn_scalar(r: RiemannProblemData, lam: complex, N: int = 512) -> complex:
    """``1 - i phi ((lam - Y)(lam - X))^{-1} phi^* J`` for the discrete model pair."""
    lam = complex(lam)
    _, X, Y, phi = direct_model_pair(r, N)
    eye = np.eye(N)
    L = (lam * eye - Y) @ (lam * eye - X)
    sol = np.linalg.solve(L, phi.conj().T * r.J)
    return complex(1.0 - 1j * (phi @ sol)[0, 0])
