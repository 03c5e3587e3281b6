"""Independent reference computations used by the tests.

Nothing here calls into the package's solvers: roots come from the
quadratic formula, Sylvester solutions from a Kronecker-product linear
system, time integration from a hand-rolled RK4 on the first-order system.
"""

from __future__ import annotations

import cmath

import numpy as np


def quadratic_roots(b: complex, c: complex) -> tuple[complex, complex]:
    """Roots of ``z^2 + b z + c`` ordered by decreasing real part."""
    s = cmath.sqrt(b * b - 4 * c)
    r = sorted([(-b + s) / 2, (-b - s) / 2], key=lambda z: (-z.real, -z.imag))
    return r[0], r[1]


def sylvester_kron(X: np.ndarray, Y: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Solve ``K Y - X K = C`` via ``(Y^T (x) I - I (x) X) vec K = vec C`` (column-major vec)."""
    n, m = X.shape[0], Y.shape[0]
    M = np.kron(Y.T, np.eye(n)) - np.kron(np.eye(m), X)
    vecK = np.linalg.solve(M, C.reshape(-1, order="F"))
    return vecK.reshape((n, m), order="F")


def rk4_second_order(A, B, drive, u_fn, h0, h1, T: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """RK4 for ``h'' = drive u(t) - B h' - A h``; returns ``(times, h)``."""
    n = A.shape[0]
    steps = int(round(T / dt))
    y = np.concatenate([np.asarray(h0, complex), np.asarray(h1, complex)])
    out = [y[:n].copy()]

    def f(t, y):
        return np.concatenate([y[n:], drive @ u_fn(t) - B @ y[n:] - A @ y[:n]])

    for k in range(steps):
        t = k * dt
        a = f(t, y)
        b = f(t + dt / 2, y + dt / 2 * a)
        c = f(t + dt / 2, y + dt / 2 * b)
        d = f(t + dt, y + dt * c)
        y = y + dt * (a + 2 * b + 2 * c + d) / 6
        out.append(y[:n].copy())
    return np.arange(steps + 1) * dt, np.array(out)


def scalar_charfn(b: float, lam1: complex, lam: complex) -> complex:
    """Closed-form scalar factor ``(lam^2 + b lam + conj lam1)/(lam^2 + b lam + lam1)``."""
    return (lam * lam + b * lam + np.conj(lam1)) / (lam * lam + b * lam + lam1)


def scalar_defect_sign(b: float, lam: complex) -> float:
    """Sign of ``1 - |S|^2`` for one factor: ``sign(Im lam * (Re lam + b/2))``."""
    return float(np.sign(lam.imag * (lam.real + b / 2)))


def resolvent_direct(A, B, lam) -> np.ndarray:
    n = A.shape[0]
    return np.linalg.solve(lam * lam * np.eye(n) + lam * B + A, np.eye(n))
