"""Dense complex matrices, colligations and quadratic pencils.

A colligation packages a non-self-adjoint main operator ``A`` with a channel
map ``phi`` and a Hermitian signature ``sigma`` subject to the defect identity

    A - A^* = i phi^* sigma phi.

Adding a Hermitian dissipation operator ``B`` gives the pencil
``L(lam) = lam^2 I + lam B + A`` studied throughout the package.  All
matrices are plain ``numpy`` complex arrays; the dataclasses below only
check shapes and identities and never copy-on-write.
"""

from __future__ import annotations

from dataclasses import dataclass, field, InitVar

import numpy as np

from .errors import SpectralPointError, StructuralError, ValidationError

__all__ = [
    "as_cmatrix",
    "opnorm",
    "Colligation",
    "PencilSystem",
    "SpectrumInfo",
    "DefectReport",
    "validate_colligation",
    "embed_defect",
    "colligation_from_operator",
    "pencil_eval",
    "resolvent_eval",
    "spectral_separation",
]

TOL_DEFECT = 1e-10
TOL_HERM = 1e-12
RANK_CUTOFF = 1e-12
_ABS_FLOOR = 1e-14
_SINGULAR_RTOL = 8.0 * np.finfo(float).eps


def as_cmatrix(a, name: str = "matrix", shape: tuple[int | None, int | None] | None = None) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array, raising StructuralError otherwise."""
    try:
        m = np.asarray(a, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"{name}: not a numeric matrix ({exc})") from None
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise StructuralError(f"{name}: expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise StructuralError(f"{name}: contains non-finite entries")
    if shape is not None:
        for axis, want in enumerate(shape):
            if want is not None and m.shape[axis] != want:
                raise StructuralError(f"{name}: expected shape {shape}, got {m.shape}")
    return m


def opnorm(m: np.ndarray) -> float:
    """Spectral norm; zero for empty matrices."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    if m.ndim == 1:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, 2))


def _herm(m: np.ndarray) -> np.ndarray:
    return m.conj().T


@dataclass(frozen=True)
class DefectReport:
    defect_residual: float
    hermiticity_residual: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class Colligation:
    """Finite-dimensional local colligation ``(A, H, phi, E, sigma)``.

    Construction checks shapes and, unless ``check=False``, the defect
    identity at the default tolerance.  ``check=False`` exists so that
    deliberately broken data can still be inspected with
    :func:`validate_colligation`.
    """

    A: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        A = as_cmatrix(self.A, "A")
        if A.shape[0] != A.shape[1]:
            raise StructuralError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        phi = np.asarray(self.phi, dtype=complex)
        if phi.size == 0 and phi.ndim != 2:
            phi = np.zeros((0, n), dtype=complex)
        phi = as_cmatrix(phi, "phi", (None, n))
        m = phi.shape[0]
        sigma = np.asarray(self.sigma, dtype=complex)
        if sigma.size == 0 and sigma.ndim != 2:
            sigma = np.zeros((m, m), dtype=complex)
        sigma = as_cmatrix(sigma, "sigma", (m, m))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "sigma", sigma)
        if check:
            report = validate_colligation(self)
            if not report.passed:
                raise ValidationError(
                    "colligation defect identity violated: "
                    f"residual {report.defect_residual:.3e}, "
                    f"sigma hermiticity {report.hermiticity_residual:.3e}, "
                    f"tolerance {report.tolerance:.3e}"
                )

    @property
    def dimH(self) -> int:
        return self.A.shape[0]

    @property
    def dimE(self) -> int:
        return self.phi.shape[0]

    def channel_operator(self) -> np.ndarray:
        """``phi^* sigma phi``."""
        return _herm(self.phi) @ self.sigma @ self.phi


@dataclass(frozen=True)
class PencilSystem:
    """A colligation together with the Hermitian dissipation operator ``B``."""

    colligation: Colligation
    B: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        n = self.colligation.dimH
        B = as_cmatrix(self.B, "B", (n, n))
        object.__setattr__(self, "B", B)
        if check:
            tol = max(TOL_HERM * opnorm(B), _ABS_FLOOR)
            res = opnorm(B - _herm(B))
            if res > tol:
                raise ValidationError(f"B is not Hermitian: residual {res:.3e} > {tol:.3e}")

    @classmethod
    def from_matrices(cls, A, B, phi=None, sigma=None, check: bool = True) -> "PencilSystem":
        """Build a pencil; when ``phi`` is omitted it is derived from ``A - A^*``."""
        A = as_cmatrix(A, "A")
        if phi is None:
            phi, sigma = embed_defect(A)
        return cls(Colligation(A, phi, sigma, check=check), B, check=check)

    @property
    def A(self) -> np.ndarray:
        return self.colligation.A

    @property
    def phi(self) -> np.ndarray:
        return self.colligation.phi

    @property
    def sigma(self) -> np.ndarray:
        return self.colligation.sigma

    @property
    def n(self) -> int:
        return self.colligation.dimH

    def companion(self) -> np.ndarray:
        """Linearization acting on ``col[h, dh/dt]``: ``[[0, I], [-A, -B]]``."""
        n = self.n
        top = np.hstack([np.zeros((n, n), dtype=complex), np.eye(n, dtype=complex)])
        bottom = np.hstack([-self.A, -self.B])
        return np.vstack([top, bottom])

    def eigenvalues(self) -> np.ndarray:
        """Spectrum of the pencil (the ``2n`` eigenvalues of the companion matrix)."""
        return np.linalg.eigvals(self.companion())


@dataclass(frozen=True)
class SpectrumInfo:
    eigenvalues: tuple[complex, ...]
    separation: float = field(default=float("inf"))


def validate_colligation(c: Colligation, tol: float | None = None) -> DefectReport:
    """Measure ``||(A - A^*) - i phi^* sigma phi||`` and ``||sigma - sigma^*||``.

    The default tolerance is ``1e-10 * ||A||`` (with a tiny absolute floor).
    """
    A = c.A
    if tol is None:
        tol = max(TOL_DEFECT * opnorm(A), _ABS_FLOOR)
    defect = opnorm((A - _herm(A)) - 1j * c.channel_operator())
    herm = opnorm(c.sigma - _herm(c.sigma))
    herm_tol = max(TOL_HERM * opnorm(c.sigma), _ABS_FLOOR)
    return DefectReport(defect, herm, tol, bool(defect <= tol and herm <= herm_tol))


def embed_defect(A, cutoff: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Factor the imaginary part of ``A`` as ``i phi^* sigma phi``.

    ``(A - A^*)/i`` is Hermitian; its eigenpairs with ``|mu| > cutoff`` give
    the channels, ``phi = |mu|^{1/2} U^*`` and ``sigma = sign(mu)``.  Positive
    channels come first.  The default cutoff is ``1e-12 * ||A||``.

    Returns
    -------
    phi : (r, n) complex array
    sigma : (r, r) complex diagonal array with entries +-1
    """
    A = as_cmatrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise StructuralError(f"A must be square, got {A.shape}")
    if cutoff is None:
        cutoff = RANK_CUTOFF * opnorm(A)
    imag_part = (A - _herm(A)) / 1j
    imag_part = 0.5 * (imag_part + _herm(imag_part))
    mu, U = np.linalg.eigh(imag_part)
    keep = np.abs(mu) > cutoff
    mu, U = mu[keep], U[:, keep]
    order = np.argsort(-mu, kind="stable")
    mu, U = mu[order], U[:, order]
    phi = np.sqrt(np.abs(mu))[:, None] * _herm(U)
    sigma = np.diag(np.sign(mu)).astype(complex)
    if phi.shape[0] == 0:
        phi = np.zeros((0, A.shape[0]), dtype=complex)
        sigma = np.zeros((0, 0), dtype=complex)
    return phi, sigma


def colligation_from_operator(A, cutoff: float | None = None) -> Colligation:
    phi, sigma = embed_defect(A, cutoff)
    return Colligation(A, phi, sigma)


def _pencil_matrix(B: np.ndarray, A: np.ndarray, lam: complex) -> np.ndarray:
    n = A.shape[0]
    return lam * lam * np.eye(n, dtype=complex) + lam * B + A


def pencil_eval(p: PencilSystem, lam: complex) -> np.ndarray:
    """``L(lam) = lam^2 I + lam B + A``."""
    return _pencil_matrix(p.B, p.A, complex(lam))


def _checked_inverse(M: np.ndarray, what: str, scale: float | None = None) -> np.ndarray:
    """Inverse of ``M``; SpectralPointError when ``sigma_min(M) <= 8 eps * max(||M||, scale)``.

    ``scale`` is the magnitude of the terms that were summed into ``M``, so
    cancellation down to rounding level counts as singular even when ``M`` is
    tiny but well conditioned (e.g. ``1 x 1``).
    """
    if M.size == 0:
        return M.copy()
    s = np.linalg.svd(M, compute_uv=False)
    ref = max(float(s[0]), 0.0 if scale is None else float(scale))
    if not np.all(np.isfinite(s)) or s[-1] <= _SINGULAR_RTOL * ref:
        cond = s[0] / s[-1] if s[-1] > 0 else np.inf
        raise SpectralPointError(f"{what} is singular (condition number {cond:.3e})")
    return np.linalg.inv(M)


def _pencil_inverse(B: np.ndarray, A: np.ndarray, lam: complex, what: str | None = None) -> np.ndarray:
    """``L(lam)^{-1}`` with the singularity test scaled by ``|lam|^2 + |lam| ||B|| + ||A||``."""
    lam = complex(lam)
    scale = abs(lam) ** 2 + abs(lam) * opnorm(B) + opnorm(A)
    return _checked_inverse(_pencil_matrix(B, A, lam), what or f"L({lam})", scale)


def resolvent_eval(p: PencilSystem, lam: complex) -> np.ndarray:
    """``L(lam)^{-1}``; raises SpectralPointError at (numerical) eigenvalues."""
    return _pencil_inverse(p.B, p.A, lam)


def spectral_separation(s1, s2) -> float:
    """Minimum distance between two finite point sets (``inf`` if either is empty)."""
    s1 = np.asarray(s1, dtype=complex).ravel()
    s2 = np.asarray(s2, dtype=complex).ravel()
    if s1.size == 0 or s2.size == 0:
        return float("inf")
    return float(np.min(np.abs(s1[:, None] - s2[None, :])))
