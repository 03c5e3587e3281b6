"""Seeded random instances for property checks and the ``verify`` command.

All generators take a ``numpy.random.Generator`` so runs are reproducible
from a single integer seed.
"""

from __future__ import annotations

import numpy as np

from .core import Colligation, PencilSystem, _herm

__all__ = [
    "random_complex",
    "random_unitary",
    "random_hermitian",
    "random_pencil",
    "random_gap_pencil",
    "random_signature_pencil",
    "scalar_example",
]


def random_complex(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(random_complex(rng, n, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]


def random_hermitian(rng: np.random.Generator, n: int, eig_lo: float, eig_hi: float) -> np.ndarray:
    U = random_unitary(rng, n)
    mu = rng.uniform(eig_lo, eig_hi, n)
    H = (U * mu) @ _herm(U)
    return 0.5 * (H + _herm(H))


def random_pencil(rng: np.random.Generator, n: int, a_norm: float = 1.0, b_range=(-2.0, 2.0)) -> PencilSystem:
    """Generic pencil: ``A`` of spectral norm ``a_norm``, ``B`` Hermitian with eigenvalues in ``b_range``."""
    A = random_complex(rng, n, n)
    A *= a_norm / np.linalg.norm(A, 2)
    B = random_hermitian(rng, n, *b_range)
    return PencilSystem.from_matrices(A, B)


def random_gap_pencil(rng: np.random.Generator, n: int, a_norm: float = 1.0) -> PencilSystem:
    """Pencil with a certified gap: ``B`` has eigenvalues in ``[4, 6]`` and ``||A|| = a_norm <= 1``.

    Then ``4 ||B^-1|| ||B^-1 A|| <= a_norm / 4``, the small root has spectrum
    in the disc of radius about ``1/2`` and the large root sits near ``-B``.
    """
    A = random_complex(rng, n, n)
    A *= a_norm / np.linalg.norm(A, 2)
    B = random_hermitian(rng, n, 4.0, 6.0)
    return PencilSystem.from_matrices(A, B)


def random_signature_pencil(rng: np.random.Generator, n: int, m: int, sigma_diag) -> PencilSystem:
    """Pencil with a prescribed ``m``-channel signature, ``A = A_R + (i/2) phi^* sigma phi``."""
    sigma = np.diag(np.asarray(sigma_diag, dtype=complex))
    phi = 0.5 * random_complex(rng, m, n)
    A_R = random_hermitian(rng, n, -1.0, 1.0)
    A = A_R + 0.5j * _herm(phi) @ sigma @ phi
    B = random_hermitian(rng, n, -1.0, 1.0)
    return PencilSystem(Colligation(A, phi, sigma), B)


def scalar_example() -> PencilSystem:
    """``b = 0``, ``lam_1 = i``: ``A = [[i]]``, ``phi = [[sqrt 2]]``, ``sigma = [[1]]``."""
    return PencilSystem(Colligation([[1j]], [[np.sqrt(2.0)]], [[1.0]]), [[0.0]])
