"""Canonical form of a pair of anti-commuting Hermitian matrices.

For ``D B + B D = 0`` the space splits as ``G_+ (+) G_- (+) G_0`` with

    B = [[V B_- V^*, 0, 0], [0, -B_-, 0], [0, 0, B_0]],
    D = [[0, V |Gamma|, 0], [|Gamma| V^*, 0, 0], [0, 0, D_0]],

where ``B_- >= 0`` and ``|Gamma| > 0`` commute and ``B_0 D_0 = 0``.  The
bases of ``G_+`` and ``G_-`` are chosen from a singular value decomposition
of ``Gamma = P_+ D P_-`` so that ``V`` is the identity in coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import _herm, as_cmatrix, opnorm
from ..errors import PreconditionError, StructuralError

__all__ = ["AnticommutingDecomposition", "anticommuting_canonical_form"]


@dataclass(frozen=True)
class AnticommutingDecomposition:
    """Bases and blocks of the canonical form.

    ``G_plus``, ``G_minus`` and ``G_0`` hold orthonormal basis vectors as
    columns.  ``B_minus``, ``Gamma_abs`` and ``V`` act in the coordinates of
    ``G_minus`` (``V`` maps them onto the coordinates of ``G_plus``);
    ``B_0``, ``D_0`` act in the coordinates of ``G_0``.
    """

    G_plus: np.ndarray
    G_minus: np.ndarray
    G_0: np.ndarray
    B_minus: np.ndarray
    Gamma_abs: np.ndarray
    V: np.ndarray
    B_0: np.ndarray
    D_0: np.ndarray
    residuals: dict

    @property
    def rank(self) -> int:
        return self.G_minus.shape[1]

    def basis(self) -> np.ndarray:
        return np.hstack([self.G_plus, self.G_minus, self.G_0])

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """``B`` and ``D`` in the adapted basis."""
        r = self.rank
        k = self.G_0.shape[1]
        Z = lambda a, b: np.zeros((a, b), dtype=complex)  # noqa: E731
        VBV = self.V @ self.B_minus @ _herm(self.V)
        B = np.block([[VBV, Z(r, r), Z(r, k)], [Z(r, r), -self.B_minus, Z(r, k)], [Z(k, r), Z(k, r), self.B_0]])
        VG = self.V @ self.Gamma_abs
        D = np.block([[Z(r, r), VG, Z(r, k)], [_herm(VG), Z(r, r), Z(r, k)], [Z(k, r), Z(k, r), self.D_0]])
        return B, D

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        W = self.basis()
        Bb, Db = self.blocks()
        return W @ Bb @ _herm(W), W @ Db @ _herm(W)


def anticommuting_canonical_form(B, D, tol: float = 1e-10) -> AnticommutingDecomposition:
    """Decompose an anti-commuting Hermitian pair.

    Parameters
    ----------
    B, D : (n, n) Hermitian arrays with ``||D B + B D|| <= tol * scale``
    tol : float
        Relative tolerance for the anti-commutation check and the rank
        decisions (zero eigenvalues of ``B``, zero singular values of
        ``Gamma``).

    Raises
    ------
    PreconditionError
        If ``{D, B}`` is not small or a diagonal block ``P_+ D P_+``,
        ``P_- D P_-`` fails to vanish.
    """
    B = as_cmatrix(B, "B")
    D = as_cmatrix(D, "D", B.shape)
    if B.shape[0] != B.shape[1]:
        raise StructuralError("B must be square")
    scale = max(1.0, opnorm(B), opnorm(D)) ** 2
    anti = opnorm(D @ B + B @ D)
    if anti > tol * scale:
        raise PreconditionError(f"||DB + BD|| = {anti:.3e} exceeds {tol * scale:.3e}")
    B = 0.5 * (B + _herm(B))
    D = 0.5 * (D + _herm(D))
    mu, U = np.linalg.eigh(B)
    cut = tol * max(1.0, opnorm(B))
    pos, neg = mu > cut, mu < -cut
    Up, Um, U0 = U[:, pos], U[:, neg], U[:, ~(pos | neg)]
    corner = max(opnorm(_herm(Up) @ D @ Up), opnorm(_herm(Um) @ D @ Um))
    if corner > tol * scale:
        raise PreconditionError(f"D does not vanish on the spectral subspaces of B (corner {corner:.3e})")
    Gamma = _herm(Up) @ D @ Um  # H_- -> H_+
    if Gamma.size:
        P, s, Qh = np.linalg.svd(Gamma)
        Q = _herm(Qh)
        r = int(np.count_nonzero(s > tol * max(1.0, opnorm(D))))
    else:
        P = np.zeros((Up.shape[1], Up.shape[1]), dtype=complex)
        Q = np.zeros((Um.shape[1], Um.shape[1]), dtype=complex)
        s = np.zeros(0)
        r = 0
    Gp = Up @ P[:, :r]
    Gm = Um @ Q[:, :r]
    G0 = np.hstack([U0, Up @ P[:, r:], Um @ Q[:, r:]])
    B_minus = -_herm(Gm) @ B @ Gm
    B_minus = 0.5 * (B_minus + _herm(B_minus))
    Gamma_abs = np.diag(s[:r]).astype(complex)
    V = np.eye(r, dtype=complex)
    B_0 = _herm(G0) @ B @ G0
    D_0 = _herm(G0) @ D @ G0
    B_plus = _herm(Gp) @ B @ Gp
    dec = AnticommutingDecomposition(Gp, Gm, G0, B_minus, Gamma_abs, V, B_0, D_0, {})
    Br, Dr = dec.reconstruct()
    residuals = {
        "anticommutator": anti,
        "corner": corner,
        "commutator": opnorm(B_minus @ Gamma_abs - Gamma_abs @ B_minus),
        "equivalence": opnorm(B_plus - V @ B_minus @ _herm(V)),
        "kernel_product": opnorm(B_0 @ D_0),
        "reconstruct_B": opnorm(Br - B),
        "reconstruct_D": opnorm(Dr - D),
        "min_B_minus": float(np.min(np.linalg.eigvalsh(B_minus))) if r else 0.0,
    }
    return AnticommutingDecomposition(Gp, Gm, G0, B_minus, Gamma_abs, V, B_0, D_0, residuals)
