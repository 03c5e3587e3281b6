from __future__ import annotations

import numpy as np
import pytest

from pencilkit import PencilSystem, StructuralError, ValidationError, factor_spectral
from pencilkit import dynamics as dy
from pencilkit.charfn import char_fn
from pencilkit.samples import random_complex, random_gap_pencil, random_hermitian, random_signature_pencil

from oracles import rk4_second_order


def rel_err(a, b):
    return float(np.max(np.abs(a - b)) / max(1e-300, np.max(np.abs(b))))


def test_time_grid():
    t = dy.time_grid(1.0, 0.25)
    assert np.allclose(t, [0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValidationError):
        dy.time_grid(1.0, 0.3)
    with pytest.raises(ValidationError):
        dy.time_grid(-1.0, 0.1)


def test_cosh_solution():
    # h'' = h with h(0)=1, h'(0)=0
    p = PencilSystem.from_matrices([[-1.0]], [[0.0]])
    f = factor_spectral(p)
    t = dy.time_grid(2.0, 1e-3)
    tr = dy.solve_homogeneous(f, [1.0], [0.0], t)
    assert np.max(np.abs(tr.h[:, 0] - np.cosh(t))) <= 1e-12
    assert np.max(np.abs(tr.hdot[:, 0] - np.sinh(t))) <= 1e-12


def test_homogeneous_matches_oracle(rng):
    p = random_gap_pencil(rng, 3)
    f = factor_spectral(p)
    h0, h1 = random_complex(rng, 3), random_complex(rng, 3)
    t = dy.time_grid(1.0, 1e-3)
    tr = dy.solve_homogeneous(f, h0, h1, t)
    _, h_ref = rk4_second_order(p.A, p.B, np.zeros((3, 0)), lambda s: np.zeros(0), h0, h1, 1.0, 1e-3)
    assert rel_err(tr.h, h_ref) <= 1e-9


@pytest.mark.parametrize("kind", ["plane", "sampled"])
def test_forced_matches_oracle(rng, kind):
    p = random_signature_pencil(rng, 3, 2, [1, -1])
    T, dt = 1.0, 1e-3
    t = dy.time_grid(T, dt)
    u0 = random_complex(rng, 2)
    lam = 0.4 - 0.8j
    if kind == "plane":
        u = dy.PlaneWave(lam, u0)
        u_fn = lambda s: np.exp(lam * s) * u0  # noqa: E731
    else:
        vals = np.cos(3 * t)[:, None] * u0[None, :]
        u = dy.SampledSignal(t, vals)
        u_fn = lambda s: np.cos(3 * s) * u0  # noqa: E731
    h0, h1 = random_complex(rng, 3), random_complex(rng, 3)
    sim = dy.SimulationInput(p, h0, h1, u, T, dt)
    tr = dy.simulate(sim)
    drive = p.phi.conj().T @ p.sigma
    _, h_ref = rk4_second_order(p.A, p.B, drive, u_fn, h0, h1, T, dt)
    assert rel_err(tr.h, h_ref) <= 1e-6


def test_simulate_rk4_solver_agrees(rng):
    p = random_gap_pencil(rng, 2)
    u = dy.PlaneWave(1j, random_complex(rng, p.colligation.dimE))
    sim = dy.SimulationInput(p, random_complex(rng, 2), random_complex(rng, 2), u, 0.5, 1e-3)
    assert rel_err(dy.simulate(sim).h, dy.simulate(sim, "rk4").h) <= 1e-8


def test_output_is_u_minus_i_phi_h(rng):
    p = random_signature_pencil(rng, 2, 1, [1])
    u = dy.PlaneWave(0.0, [1.0])
    sim = dy.SimulationInput(p, np.zeros(2), np.zeros(2), u, 0.1, 1e-2)
    tr = dy.simulate(sim)
    assert np.allclose(tr.v, tr.u - 1j * tr.h @ p.phi.T, atol=1e-14)


def test_plane_wave_steady_state(rng):
    p = random_signature_pencil(rng, 3, 2, [1, 1])
    f = factor_spectral(p)
    lam = 0.3 + 2.0j
    u0 = random_complex(rng, 2)
    h0, h1, v0 = dy.plane_wave_response(f, lam, u0)
    cX, cY = dy.plane_wave_transients(f, lam, u0, h0, h1)
    assert np.max(np.abs(cX)) <= 1e-12 and np.max(np.abs(cY)) <= 1e-12
    assert np.allclose(v0, char_fn(p, lam) @ u0)
    # the Cauchy solution from the steady initial data stays on e^{lam t} h0
    sim = dy.SimulationInput(p, h0, h1, dy.PlaneWave(lam, u0), 0.5, 1e-3)
    tr = dy.simulate(sim)
    exact = np.exp(lam * tr.times)[:, None] * h0[None, :]
    assert rel_err(tr.h, exact) <= 1e-9
    assert np.allclose(tr.v, np.exp(lam * tr.times)[:, None] * v0[None, :], atol=1e-9)


def test_plane_wave_transients_nonzero_off_steady_state(rng):
    p = random_signature_pencil(rng, 2, 1, [1])
    f = factor_spectral(p)
    cX, cY = dy.plane_wave_transients(f, 1j, [1.0], np.ones(2), np.zeros(2))
    assert np.max(np.abs(cX)) + np.max(np.abs(cY)) > 1e-3


def test_conservation_second_order(rng):
    p = random_signature_pencil(rng, 3, 2, [1, -1])
    u = dy.PlaneWave(0.2 + 1j, random_complex(rng, 2))
    h0, h1 = random_complex(rng, 3), random_complex(rng, 3)
    res = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        tr = dy.simulate(dy.SimulationInput(p, h0, h1, u, 1.0, dt))
        res.append(dy.conservation_report(tr, p).max_residual)
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders >= 1.9)


def test_conservation_exact_along_plane_wave(rng):
    p = random_signature_pencil(rng, 3, 2, [1, -1])
    tr = dy.plane_wave_trajectory(p, 0.1 + 1.5j, random_complex(rng, 2), dy.time_grid(1.0, 1e-2))
    rep = dy.conservation_report(tr, p, derivative="analytic")
    assert rep.max_residual <= 1e-10 * max(1.0, np.max(np.abs(rep.flux)))


def test_conservation_zero_for_hermitian_free_motion(rng):
    A = random_hermitian(rng, 3, 1.0, 4.0)
    p = PencilSystem.from_matrices(A, np.zeros((3, 3)))
    f = factor_spectral(p, "halfplane-im")
    tr = dy.solve_homogeneous(f, random_complex(rng, 3), random_complex(rng, 3), dy.time_grid(1.0, 1e-3))
    rep = dy.conservation_report(tr, p, derivative="analytic")
    assert rep.max_residual <= 1e-12
    assert rep.max_integral_residual <= 1e-12


def test_integral_form_with_indefinite_B(rng):
    p = random_signature_pencil(rng, 3, 1, [1])
    p = PencilSystem(p.colligation, np.diag([1.5, -0.5, 0.0]).astype(complex))
    u = dy.PlaneWave(1j, [1.0])
    tr = dy.simulate(dy.SimulationInput(p, random_complex(rng, 3), random_complex(rng, 3), u, 1.0, 1e-3))
    rep = dy.conservation_report(tr, p)
    assert rep.max_integral_residual <= 1e-4
    storage = rep.dissipation_plus - rep.dissipation_minus
    assert np.allclose(storage, 2 * np.imag(np.sum((tr.hdot @ p.B.T) * tr.h.conj(), axis=1)), atol=1e-10)


def test_conservation_rejects_unknown_mode(rng):
    p = random_gap_pencil(rng, 1)
    tr = dy.plane_wave_trajectory(p, 1j, np.ones(p.colligation.dimE), dy.time_grid(1.0, 0.5))
    with pytest.raises(ValueError):
        dy.conservation_report(tr, p, derivative="spectral")


def test_simulation_input_validation(rng):
    p = random_gap_pencil(rng, 2)
    with pytest.raises(StructuralError):
        dy.SimulationInput(p, np.zeros(3), np.zeros(2), None, 1.0, 0.1)
    with pytest.raises(StructuralError):
        dy.SimulationInput(p, np.zeros(2), np.zeros(2), dy.PlaneWave(1j, np.ones(5)), 1.0, 0.1)


def test_sampled_signal_validation():
    with pytest.raises(StructuralError):
        dy.SampledSignal([0.0, 0.0], [1.0, 2.0])
    s = dy.SampledSignal([0.0, 1.0], [0.0, 2.0])
    assert s(0.25)[0, 0] == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        s(2.0)
