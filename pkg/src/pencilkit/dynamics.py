"""Second-order open system ``h'' + B h' + A h = phi^* sigma u``, ``v = u - i phi h``.

The Cauchy problem is solved in closed form from a spectral factorization:
``h = F0 + F1`` with the homogeneous part

    F0(t) = e^{tX} g + K e^{tY} g~,   g~ = h1 - X h0,   g = h0 - K g~,

and the forced part

    F1(t) = -int_0^t e^{(t-s)X} K phi^* sigma u(s) ds + K int_0^t e^{(t-s)Y} phi^* sigma u(s) ds.

The convolutions are advanced step by step with Simpson-type weights, so
the forced part is fourth-order accurate in the time step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Union

import numpy as np
import scipy.linalg
from scipy.integrate import cumulative_trapezoid

from .charfn import char_fn
from .core import PencilSystem, _checked_inverse, _herm, _pencil_inverse
from .errors import StructuralError, ValidationError
from .factor import FactoredPencil, SplitRule, factor_spectral

__all__ = [
    "InputSignal",
    "PlaneWave",
    "SampledSignal",
    "SimulationInput",
    "Trajectory",
    "ConservationReport",
    "time_grid",
    "solve_homogeneous",
    "solve_forced",
    "simulate",
    "plane_wave_response",
    "plane_wave_transients",
    "plane_wave_trajectory",
    "conservation_report",
    "integrate_rk4",
]


class InputSignal(Protocol):
    dim: int

    def __call__(self, t: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class PlaneWave:
    """``u(t) = e^{lam t} u0``."""

    lam: complex
    u0: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "u0", np.atleast_1d(np.asarray(self.u0, dtype=complex)))

    @property
    def dim(self) -> int:
        return self.u0.shape[0]

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(self.lam * t)[:, None] * self.u0[None, :]


@dataclass(frozen=True)
class SampledSignal:
    """Samples ``values[k] = u(times[k])``, linearly interpolated in between."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or v.shape[0] != t.shape[0] or t.size < 2:
            raise StructuralError("sampled signal needs at least two times and one value row per time")
        if np.any(np.diff(t) <= 0):
            raise StructuralError("sample times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.min() < self.times[0] - 1e-12 or t.max() > self.times[-1] + 1e-12:
            raise ValidationError("requested times fall outside the sampled signal")
        out = np.empty((t.size, self.dim), dtype=complex)
        for k in range(self.dim):
            out[:, k] = np.interp(t, self.times, self.values[:, k].real) + 1j * np.interp(
                t, self.times, self.values[:, k].imag
            )
        return out


Signal = Union[PlaneWave, SampledSignal]


def time_grid(T: float, dt: float) -> np.ndarray:
    """Uniform grid ``0, dt, ..., T``; ``dt`` must divide ``T`` up to rounding."""
    if not (T > 0 and dt > 0):
        raise ValidationError("horizon and step must be positive")
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValidationError(f"dt={dt} does not divide T={T}")
    return np.linspace(0.0, T, steps + 1)


@dataclass(frozen=True)
class SimulationInput:
    p: PencilSystem
    h0: np.ndarray
    h1: np.ndarray
    u: Signal | None
    T: float
    dt: float

    def __post_init__(self) -> None:
        n = self.p.n
        for name in ("h0", "h1"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=complex))
            if v.shape != (n,):
                raise StructuralError(f"{name} must have length {n}, got shape {v.shape}")
            object.__setattr__(self, name, v)
        if self.u is not None and self.u.dim != self.p.colligation.dimE:
            raise StructuralError(f"input has dimension {self.u.dim}, channel space has {self.p.colligation.dimE}")
        time_grid(self.T, self.dt)

    def times(self) -> np.ndarray:
        return time_grid(self.T, self.dt)


@dataclass(frozen=True)
class Trajectory:
    """Samples of ``h``, ``h'``, the input ``u`` and the output ``v = u - i phi h``.

    Arrays are indexed ``[time, component]``.  ``hddot`` is filled by the
    closed-form solvers and left ``None`` by pure time-steppers.
    """

    times: np.ndarray
    h: np.ndarray
    hdot: np.ndarray
    v: np.ndarray
    u: np.ndarray
    hddot: np.ndarray | None = None

    def __post_init__(self) -> None:
        N = self.times.shape[0]
        for name in ("h", "hdot", "v", "u"):
            if getattr(self, name).shape[0] != N:
                raise StructuralError(f"{name} has {getattr(self, name).shape[0]} samples for {N} times")


def _output(p: PencilSystem, u: np.ndarray, h: np.ndarray) -> np.ndarray:
    return u - 1j * h @ p.phi.T


def _exp_powers(M: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``e^{t_k M}`` for every ``t_k``; uniform grids reuse one step exponential."""
    n = M.shape[0]
    out = np.empty((times.size, n, n), dtype=complex)
    dts = np.diff(times)
    uniform = times.size > 1 and times[0] == 0.0 and np.allclose(dts, dts[0], rtol=1e-12, atol=0)
    if not uniform:
        for k, t in enumerate(times):
            out[k] = scipy.linalg.expm(t * M)
        return out
    E = scipy.linalg.expm(dts[0] * M)
    out[0] = np.eye(n)
    for k in range(1, times.size):
        # refresh periodically to keep rounding from compounding
        out[k] = scipy.linalg.expm(times[k] * M) if k % 64 == 0 else out[k - 1] @ E
    return out


def solve_homogeneous(f: FactoredPencil, h0, h1, times) -> Trajectory:
    """Closed-form solution with zero input from ``h(0) = h0``, ``h'(0) = h1``."""
    p = f.pencil
    n = p.n
    h0 = np.atleast_1d(np.asarray(h0, dtype=complex))
    h1 = np.atleast_1d(np.asarray(h1, dtype=complex))
    if h0.shape != (n,) or h1.shape != (n,):
        raise StructuralError(f"initial data must have length {n}")
    times = np.asarray(times, dtype=float)
    X, Y, K = f.X, f.Y, f.K
    gt = h1 - X @ h0
    g = h0 - K @ gt
    EX = _exp_powers(X, times)
    EY = _exp_powers(Y, times)
    a = EX @ g  # e^{tX} g
    b = EY @ gt  # e^{tY} g~
    h = a + b @ K.T
    hdot = a @ X.T + b @ (K @ Y).T
    hddot = a @ (X @ X).T + b @ (K @ Y @ Y).T
    u = np.zeros((times.size, p.colligation.dimE), dtype=complex)
    return Trajectory(times, h, hdot, _output(p, u, h), u, hddot)


def _uniform_step(times: np.ndarray) -> float:
    if times.size < 2 or times[0] != 0.0:
        raise ValidationError("forced solver needs a grid starting at t=0 with at least two points")
    dts = np.diff(times)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=0):
        raise ValidationError("forced solver needs a uniform time grid")
    return float(dts[0])


def _convolve(M: np.ndarray, z: np.ndarray, dt: float) -> np.ndarray:
    """``I_k = int_0^{t_k} e^{(t_k - s) M} z(s) ds`` on a uniform grid.

    Even indices use composite Simpson from ``t_0``; odd indices start from
    a three-point quadratic rule on ``[t_0, t_1]`` and continue with Simpson.
    """
    N = z.shape[0]
    n = M.shape[0]
    I = np.zeros((N, n), dtype=complex)
    if N == 1:
        return I
    E1 = scipy.linalg.expm(dt * M)
    E2 = E1 @ E1
    if N == 2:
        # trapezoid on a single step
        I[1] = 0.5 * dt * (E1 @ z[0] + z[1])
        return I
    Em1 = scipy.linalg.expm(-dt * M)
    I[1] = dt / 12.0 * (5.0 * (E1 @ z[0]) + 8.0 * z[1] - Em1 @ z[2])
    for k in range(2, N):
        I[k] = E2 @ I[k - 2] + dt / 3.0 * (E2 @ z[k - 2] + 4.0 * (E1 @ z[k - 1]) + z[k])
    return I


def solve_forced(f: FactoredPencil, u: Signal | None, times) -> Trajectory:
    """Response to the input ``u`` from rest (``F1`` of the closed form)."""
    p = f.pencil
    times = np.asarray(times, dtype=float)
    m = p.colligation.dimE
    n = p.n
    if u is None:
        uu = np.zeros((times.size, m), dtype=complex)
    else:
        if u.dim != m:
            raise StructuralError(f"input has dimension {u.dim}, channel space has {m}")
        uu = u(times)
    zero = np.zeros((times.size, n), dtype=complex)
    if not np.any(uu):
        return Trajectory(times, zero, zero.copy(), uu.copy(), uu, zero.copy())
    dt = _uniform_step(times)
    X, Y, K = f.X, f.Y, f.K
    z = uu @ (_herm(p.phi) @ p.sigma).T  # phi^* sigma u
    IX = _convolve(X, z @ K.T, dt)  # int e^{(t-s)X} K z
    IY = _convolve(Y, z, dt)  # int e^{(t-s)Y} z
    h = -IX + IY @ K.T
    hdot = -IX @ X.T + IY @ (K @ Y).T
    hddot = -IX @ (X @ X).T + IY @ (K @ Y @ Y).T + z
    return Trajectory(times, h, hdot, _output(p, uu, h), uu, hddot)


def simulate(sim: SimulationInput, solver: str = "factored", split_rule: SplitRule = "gap") -> Trajectory:
    """Solve the Cauchy problem on ``[0, T]`` with the closed form or RK4."""
    times = sim.times()
    if solver == "rk4":
        return integrate_rk4(sim.p, sim.h0, sim.h1, sim.u, times)
    if solver != "factored":
        raise ValueError(f"unknown solver {solver!r}")
    f = factor_spectral(sim.p, split_rule)
    hom = solve_homogeneous(f, sim.h0, sim.h1, times)
    forced = solve_forced(f, sim.u, times)
    h = hom.h + forced.h
    return Trajectory(times, h, hom.hdot + forced.hdot, _output(sim.p, forced.u, h), forced.u,
                      hom.hddot + forced.hddot)


def _as_pencil(f) -> PencilSystem:
    return f.pencil if isinstance(f, FactoredPencil) else f


def plane_wave_response(f: FactoredPencil | PencilSystem, lam: complex, u0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Steady response to ``u = e^{lam t} u0``.

    Returns ``h0 = L(lam)^{-1} phi^* sigma u0``, ``h1 = lam h0`` and the output
    amplitude ``v0 = S(lam) u0``.
    """
    p = _as_pencil(f)
    lam = complex(lam)
    u0 = np.atleast_1d(np.asarray(u0, dtype=complex))
    if u0.shape != (p.colligation.dimE,):
        raise StructuralError(f"u0 must have length {p.colligation.dimE}")
    R = _pencil_inverse(p.B, p.A, lam, f"L({lam})")
    h0 = R @ (_herm(p.phi) @ (p.sigma @ u0))
    v0 = char_fn(p, lam) @ u0
    return h0, lam * h0, v0


def plane_wave_transients(f: FactoredPencil, lam: complex, u0, h0, h1) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``(c_X, c_Y)`` of ``e^{tX} c_X`` and ``K e^{tY} c_Y`` under a plane-wave input.

    The full solution is ``e^{tX} c_X + K e^{tY} c_Y + e^{lam t} L(lam)^{-1} z``
    with ``z = phi^* sigma u0``; both coefficients vanish for the initial data
    of :func:`plane_wave_response`.
    """
    p = f.pencil
    lam = complex(lam)
    n = p.n
    u0 = np.atleast_1d(np.asarray(u0, dtype=complex))
    h0 = np.atleast_1d(np.asarray(h0, dtype=complex))
    h1 = np.atleast_1d(np.asarray(h1, dtype=complex))
    z = _herm(p.phi) @ (p.sigma @ u0)
    eye = np.eye(n)
    RX = _checked_inverse(lam * eye - f.X, "lam I - X")
    RY = _checked_inverse(lam * eye - f.Y, "lam I - Y")
    gt = h1 - f.X @ h0
    g = h0 - f.K @ gt
    return g + RX @ (f.K @ z), gt - RY @ z


def plane_wave_trajectory(f: FactoredPencil | PencilSystem, lam: complex, u0, times) -> Trajectory:
    """Exact steady-state trajectory ``h = e^{lam t} h0`` with analytic derivatives."""
    p = _as_pencil(f)
    lam = complex(lam)
    times = np.asarray(times, dtype=float)
    h0, _, _ = plane_wave_response(p, lam, u0)
    e = np.exp(lam * times)[:, None]
    h = e * h0[None, :]
    u = PlaneWave(lam, u0)(times)
    return Trajectory(times, h, lam * h, _output(p, u, h), u, lam * lam * h)


@dataclass(frozen=True)
class ConservationReport:
    """Both sides of the energy balance sampled along a trajectory.

    ``flux = <sigma u, u> - <sigma v, v>`` and
    ``storage = d/dt 2 Im<h', h> + 2 Im<B h', h>``; ``residual = flux - storage``.
    The integral form uses ``B = B_+ - B_-`` and cumulative trapezoids.
    """

    times: np.ndarray
    flux: np.ndarray
    storage: np.ndarray
    residual: np.ndarray
    integral_residual: np.ndarray
    dissipation_plus: np.ndarray = field(repr=False)
    dissipation_minus: np.ndarray = field(repr=False)

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    @property
    def max_integral_residual(self) -> float:
        return float(np.max(np.abs(self.integral_residual))) if self.integral_residual.size else 0.0


def _imag_form(M: np.ndarray | None, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``Im <M a_k, b_k>`` along the time axis (``M=None`` means identity)."""
    Ma = a if M is None else a @ M.T
    return np.imag(np.sum(Ma * b.conj(), axis=1))


def _signature_form(sigma: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.real(np.sum((x @ sigma.T) * x.conj(), axis=1))


def conservation_report(traj: Trajectory, p: PencilSystem, derivative: str = "fd") -> ConservationReport:
    """Energy balance along a trajectory.

    Parameters
    ----------
    derivative : {"fd", "analytic"}
        ``"fd"`` differentiates ``2 Im<h', h>`` with second-order finite
        differences, so the residual measures the trajectory's consistency
        at ``O(dt^2)``.  ``"analytic"`` uses ``d/dt Im<h', h> = Im<h'', h>``
        with ``h''`` from the trajectory (or from the equation of motion).
    """
    t, h, hd = traj.times, traj.h, traj.hdot
    flux = _signature_form(p.sigma, traj.u) - _signature_form(p.sigma, traj.v)
    energy = 2.0 * _imag_form(None, hd, h)
    if derivative == "fd":
        if t.size < 3:
            raise ValidationError("finite differencing needs at least three samples")
        d_energy = np.gradient(energy, t, edge_order=2)
    elif derivative == "analytic":
        hdd = traj.hddot
        if hdd is None:
            z = traj.u @ (_herm(p.phi) @ p.sigma).T
            hdd = z - hd @ p.B.T - h @ p.A.T
        d_energy = 2.0 * _imag_form(None, hdd, h)
    else:
        raise ValueError(f"unknown derivative mode {derivative!r}")
    storage = d_energy + 2.0 * _imag_form(p.B, hd, h)

    mu, U = np.linalg.eigh(0.5 * (p.B + _herm(p.B)))
    B_plus = (U * np.clip(mu, 0, None)) @ _herm(U)
    B_minus = (U * np.clip(-mu, 0, None)) @ _herm(U)
    d_plus = 2.0 * _imag_form(B_plus, hd, h)
    d_minus = 2.0 * _imag_form(B_minus, hd, h)
    if t.size >= 2:
        int_flux = cumulative_trapezoid(flux, t, initial=0.0)
        int_plus = cumulative_trapezoid(d_plus, t, initial=0.0)
        int_minus = cumulative_trapezoid(d_minus, t, initial=0.0)
        integral = int_flux - (energy - energy[0]) - int_plus + int_minus
    else:
        integral = np.zeros_like(flux)
    return ConservationReport(t, flux, storage, flux - storage, integral, d_plus, d_minus)


def integrate_rk4(p: PencilSystem, h0, h1, u: Signal | None, times) -> Trajectory:
    """Classical RK4 on the first-order system for ``col[h, h']``.

    Stage inputs at half steps come from evaluating ``u`` directly, so
    sampled signals are interpolated there.
    """
    times = np.asarray(times, dtype=float)
    n = p.n
    m = p.colligation.dimE
    B, A = p.B, p.A
    drive = _herm(p.phi) @ p.sigma

    def u_at(t):
        if u is None:
            return np.zeros(m, dtype=complex)
        return u(np.array([t]))[0]

    def rhs(t, y):
        x, xd = y[:n], y[n:]
        return np.concatenate([xd, drive @ u_at(t) - B @ xd - A @ x])

    y = np.concatenate([np.atleast_1d(np.asarray(h0, dtype=complex)), np.atleast_1d(np.asarray(h1, dtype=complex))])
    Ys = np.empty((times.size, 2 * n), dtype=complex)
    Ys[0] = y
    for k in range(times.size - 1):
        t, dt = times[k], times[k + 1] - times[k]
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        Ys[k + 1] = y
    h, hd = Ys[:, :n], Ys[:, n:]
    uu = u(times) if u is not None else np.zeros((times.size, m), dtype=complex)
    return Trajectory(times, h, hd, _output(p, uu, h), uu, None)
