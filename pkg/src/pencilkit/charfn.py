"""Characteristic functions of a pencil and their metric relations.

``S(lam) = I - i phi L(lam)^{-1} phi^* sigma`` is the frequency response of
the open system.  ``V(lam) = phi L_R(lam)^{-1} phi^*`` uses the self-adjoint
pencil built from the real part ``A_R = (A + A^*)/2``.  For scalar chains the
sign of ``1 - |S|^2`` is predicted from the dissipation constants alone by
:func:`sign_region`.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import PencilSystem, _checked_inverse, _herm, _pencil_inverse, opnorm
from .errors import SpectralPointError, ValidationError

__all__ = [
    "CharFnSample",
    "VSample",
    "SignRegionQuery",
    "char_fn_sample",
    "char_fn",
    "metric_relation_residual",
    "v_function",
    "v_metric_residual",
    "sign_region",
    "sign_of_defect",
    "char_fn_grid",
    "thread_count",
]

BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class CharFnSample:
    lam: complex
    S: np.ndarray
    residual_metric: float | None = None


@dataclass(frozen=True)
class VSample:
    """``V(lam)`` plus the outcome of the fractional-linear cross-check.

    ``identity_residual`` is ``None`` when ``S + I`` or ``sigma`` is singular,
    in which case ``identity_verified`` is False and the check is skipped.
    """

    lam: complex
    V: np.ndarray
    identity_residual: float | None
    identity_verified: bool


@dataclass(frozen=True)
class SignRegionQuery:
    lam: complex
    b_list: tuple[float, ...]

    def __post_init__(self) -> None:
        b = tuple(float(x) for x in self.b_list)
        if not b:
            raise ValidationError("b_list must be nonempty")
        if any(b[k] < b[k + 1] for k in range(len(b) - 1)):
            raise ValidationError("b_list must be sorted non-increasing")
        object.__setattr__(self, "b_list", b)
        object.__setattr__(self, "lam", complex(self.lam))


def char_fn(p: PencilSystem, lam: complex) -> np.ndarray:
    """``I - i phi L(lam)^{-1} phi^* sigma``."""
    lam = complex(lam)
    R = _pencil_inverse(p.B, p.A, lam, f"L({lam})")
    m = p.colligation.dimE
    return np.eye(m, dtype=complex) - 1j * (p.phi @ R @ _herm(p.phi) @ p.sigma)


def char_fn_sample(p: PencilSystem, lam: complex) -> CharFnSample:
    return CharFnSample(complex(lam), char_fn(p, lam))


def _check_reflection(lam: complex, w: complex) -> None:
    if abs(lam - np.conj(w)) <= 1e-12 * max(1.0, abs(lam)):
        raise SpectralPointError("lam equals conj(w); the metric relation is a removable singularity there")


def metric_relation_residual(p: PencilSystem, lam: complex, w: complex) -> float:
    """Norm of the gap between the two sides of the metric relation.

    ``(i/(lam - conj w)) (sigma - S(w)^* sigma S(lam))`` against
    ``sigma phi (L(w)^*)^{-1} [(lam + conj w) I + B] L(lam)^{-1} phi^* sigma``.
    """
    lam, w = complex(lam), complex(w)
    _check_reflection(lam, w)
    n = p.n
    sigma, phi = p.sigma, p.phi
    R_lam = _pencil_inverse(p.B, p.A, lam, f"L({lam})")
    R_w = _pencil_inverse(p.B, p.A, w, f"L({w})")
    m = p.colligation.dimE
    eye = np.eye(m, dtype=complex)
    S_lam = eye - 1j * (phi @ R_lam @ _herm(phi) @ sigma)
    S_w = eye - 1j * (phi @ R_w @ _herm(phi) @ sigma)
    lhs = (1j / (lam - np.conj(w))) * (sigma - _herm(S_w) @ sigma @ S_lam)
    mid = (lam + np.conj(w)) * np.eye(n) + p.B
    rhs = sigma @ phi @ _herm(R_w) @ mid @ R_lam @ _herm(phi) @ sigma
    return opnorm(lhs - rhs)


def _real_part_inverse(p: PencilSystem, lam: complex, what: str) -> np.ndarray:
    """Inverse of ``L_R(lam) = lam^2 + lam B + (A + A^*)/2``."""
    return _pencil_inverse(p.B, 0.5 * (p.A + _herm(p.A)), lam, what)


def v_function(p: PencilSystem, lam: complex, tol: float = 1e-9) -> VSample:
    """``V(lam) = phi L_R(lam)^{-1} phi^*`` with ``L_R = lam^2 + lam B + (A + A^*)/2``.

    Also compares ``V`` with ``2i (S - I)(S + I)^{-1} sigma^{-1}``.  The
    comparison is advisory: it is skipped (flag False) when ``S + I`` or
    ``sigma`` is singular, and a residual above ``tol`` only clears the flag.
    """
    lam = complex(lam)
    R = _real_part_inverse(p, lam, f"L_R({lam})")
    phi = p.phi
    V = phi @ R @ _herm(phi)
    m = p.colligation.dimE
    if m == 0:
        return VSample(lam, V, None, False)
    S = char_fn(p, lam)
    eye = np.eye(m, dtype=complex)
    try:
        SpI_inv = _checked_inverse(S + eye, "S + I")
        sigma_inv = _checked_inverse(p.sigma, "sigma")
    except SpectralPointError:
        return VSample(lam, V, None, False)
    res = opnorm(V - 2j * (S - eye) @ SpI_inv @ sigma_inv)
    return VSample(lam, V, res, bool(res <= tol * max(1.0, opnorm(V))))


def v_metric_residual(p: PencilSystem, lam: complex, w: complex) -> float:
    """``(V(lam) - V(w)^*)/(lam - conj w) + phi (L_R(w)^*)^{-1} [(lam + conj w) + B] L_R(lam)^{-1} phi^*``."""
    lam, w = complex(lam), complex(w)
    _check_reflection(lam, w)
    R_lam = _real_part_inverse(p, lam, f"L_R({lam})")
    R_w = _real_part_inverse(p, w, f"L_R({w})")
    phi = p.phi
    V_lam = phi @ R_lam @ _herm(phi)
    V_w = phi @ R_w @ _herm(phi)
    lhs = (V_lam - _herm(V_w)) / (lam - np.conj(w))
    mid = (lam + np.conj(w)) * np.eye(p.n) + p.B
    rhs = -phi @ _herm(R_w) @ mid @ R_lam @ _herm(phi)
    return opnorm(lhs - rhs)


def sign_region(q: SignRegionQuery, tol: float = BOUNDARY_TOL) -> str:
    """Predicted sign of ``1 - |S(lam)|^2`` for a scalar chain.

    Each factor has ``1 - |S_k|^2`` of the sign of
    ``Im(lam) (Re(lam) + b_k/2)``.  With ``b_1 >= ... >= b_N`` every factor
    agrees when ``Re(lam)`` lies right of ``-b_N/2`` or left of ``-b_1/2``.

    Returns
    -------
    str
        ``"+"``, ``"-"`` or ``"0"``; ``"indeterminate"`` inside the strip
        ``-b_1/2 < Re(lam) < -b_N/2`` where the factors disagree;
        ``"boundary"`` within ``tol`` of a dividing line.
    """
    lam = q.lam
    left, right = -q.b_list[0] / 2.0, -q.b_list[-1] / 2.0
    if abs(lam.imag) <= tol:
        return "0" if abs(lam.imag) == 0.0 else "boundary"
    if left == right and abs(lam.real - left) == 0.0:
        return "0"
    if abs(lam.real - left) <= tol or abs(lam.real - right) <= tol:
        return "boundary"
    up = lam.imag > 0
    if lam.real > right:
        return "+" if up else "-"
    if lam.real < left:
        return "-" if up else "+"
    return "indeterminate"


def sign_of_defect(S, tol: float = 0.0) -> str:
    """Sign of ``1 - |S|^2`` as ``"+"``, ``"-"`` or ``"0"`` (``|.| <= tol`` counts as zero)."""
    d = 1.0 - abs(complex(np.asarray(S).reshape(-1)[0])) ** 2
    if abs(d) <= tol:
        return "0"
    return "+" if d > 0 else "-"


def thread_count() -> int:
    """Worker cap from ``PENCILKIT_THREADS`` (default 1)."""
    raw = os.environ.get("PENCILKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def char_fn_grid(p: PencilSystem, lams: Sequence[complex], threads: int | None = None) -> list[np.ndarray]:
    """Evaluate ``S`` at each point; results keep the input order."""
    lams = [complex(z) for z in lams]
    threads = thread_count() if threads is None else max(1, threads)
    if threads == 1:
        return [char_fn(p, z) for z in lams]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda z: char_fn(p, z), lams))
