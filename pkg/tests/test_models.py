from __future__ import annotations

import numpy as np
import pytest

from pencilkit import (
    BoundaryProblemUndefinedError,
    GridError,
    KernelSingularError,
    PairingError,
    PreconditionError,
    StructuralError,
)
from pencilkit import coupling as cp
from pencilkit import models as md
from pencilkit.core import opnorm
from pencilkit.samples import random_unitary


def channel_grid(N, a=-1.0, b=1.0, **kw):
    x = a + (np.arange(N) + 0.5) * (b - a) / N
    v = np.stack([np.cos(x), 0.5 + 0.2 * x], axis=1)
    return md.GridModel.midpoint(a, b, N, v=v, J=[1, -1], **kw)


def offdiag(M):
    return M - np.diag(np.diag(M))


# grid model


def test_grid_validation():
    with pytest.raises(GridError):
        md.GridModel([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(GridError):
        md.GridModel([0.0, 1.0], [1.0, -1.0])
    with pytest.raises(GridError):
        md.GridModel([0.0, 1.0], [1.0])
    with pytest.raises(GridError):
        md.GridModel([], [])
    with pytest.raises(StructuralError):
        md.GridModel([0.0, 1.0], [1.0, 1.0], v=np.ones((3, 1)))


def test_kernel_from_channels_is_hermitian():
    g = channel_grid(12)
    K = md.kernel_from_channels(g)
    assert K.hermitian
    phi = md.channel_map(g)
    assert np.allclose(phi.conj().T @ g.J @ phi, K.weighted(g), atol=1e-15)


def test_non_hermitian_kernel_rejected():
    g = md.GridModel.midpoint(0.0, 1.0, 3)
    K = md.KernelOnGrid(np.triu(np.ones((3, 3))))
    assert not K.hermitian
    with pytest.raises(StructuralError):
        md.hilbert_root(g, K)


def test_hilbert_commutator():
    g = channel_grid(40)
    K = md.kernel_from_channels(g)
    X = md.hilbert_root(g, K, n_mult=0.7)
    T = np.diag(g.nodes)
    C = X @ T - T @ X
    assert np.max(np.abs(C - 1j * offdiag(K.weighted(g)))) <= 1e-12
    assert np.allclose(X, X.conj().T)


def test_model_quadruple():
    N = 32
    g = channel_grid(N, mult_b=np.full(N, 0.3))
    K = md.kernel_from_channels(g)
    q = md.model_quadruple(g, K)
    assert np.max(np.abs(q.X + q.Y + q.B)) <= 1e-14
    assert np.max(np.abs(q.Y @ q.X - q.A)) <= 1e-14
    phi = md.channel_map(g)
    D = q.A - q.A.conj().T - 1j * phi.conj().T @ g.J @ phi
    assert np.max(np.abs(offdiag(D))) <= 1e-12
    # the diagonal carries the O(h) quadrature defect
    g2 = channel_grid(2 * N, mult_b=np.full(2 * N, 0.3))
    q2 = md.model_quadruple(g2, md.kernel_from_channels(g2))
    phi2 = md.channel_map(g2)
    D2 = q2.A - q2.A.conj().T - 1j * phi2.conj().T @ g2.J @ phi2
    ratio = np.max(np.abs(np.diag(D))) / np.max(np.abs(np.diag(D2)))
    assert 1.8 <= ratio <= 2.2


def test_stieltjes_anticommutator():
    g = channel_grid(30, a=0.5, b=3.0)
    K = md.kernel_from_channels(g)
    D = md.stieltjes_anticommutator(g, K)
    T = np.diag(g.nodes)
    assert np.max(np.abs(D @ T + T @ D + K.weighted(g))) <= 1e-12
    assert np.allclose(D, D.conj().T)
    assert md.anticommutator_nullity(g) == 0


def test_stieltjes_requires_positive_nodes():
    g = channel_grid(10)
    with pytest.raises(PreconditionError):
        md.stieltjes_anticommutator(g, md.kernel_from_channels(g))


def test_nullity_counts_mirror_pairs():
    g = md.GridModel([-2.0, -1.0, 0.5, 1.0, 2.0], np.ones(5))
    assert md.anticommutator_nullity(g) == 4
    assert list(md.mirror_pairs(g)) == [4, 3, -1, 1, 0]


def test_anticommutator_general():
    N = 20
    g = channel_grid(N)  # symmetric midpoint grid on [-1, 1]
    K = md.kernel_from_channels(g)
    m = 0.4 + 0.1 * g.nodes**2
    D, Km = md.anticommutator_general(g, K, m)
    T = np.diag(g.nodes)
    assert np.max(np.abs(D @ T + T @ D + Km)) <= 1e-12
    mirror = md.mirror_pairs(g)
    assert all(D[i, mirror[i]] == pytest.approx(m[i]) for i in range(N))


def test_anticommutator_general_pairing_errors():
    g = md.GridModel([-1.0, 0.5, 1.0], [1.0, 1.0, 1.0], v=np.ones(3))
    K = md.kernel_from_channels(g)
    with pytest.raises(PairingError):
        md.anticommutator_general(g, K, [0.0, 1.0, 0.0])
    g = md.GridModel([-1.0, 1.0], [1.0, 2.0], v=np.ones(2))
    with pytest.raises(PairingError):
        md.anticommutator_general(g, md.kernel_from_channels(g), [1.0, 1.0])
    g = md.GridModel([-1.0, 1.0], [1.0, 1.0], v=np.ones(2))
    with pytest.raises(PairingError):
        md.anticommutator_general(g, md.kernel_from_channels(g), [1.0, 2.0])


# anti-commuting pairs


def anticommuting_pair(rng, r=2, n0=2):
    bm = np.diag(rng.uniform(0.5, 2.0, r))
    gam = np.diag(rng.uniform(0.5, 2.0, r))
    Bb = np.zeros((2 * r + n0,) * 2, dtype=complex)
    Db = np.zeros_like(Bb)
    Bb[:r, :r], Bb[r : 2 * r, r : 2 * r] = bm, -bm
    Db[:r, r : 2 * r], Db[r : 2 * r, :r] = gam, gam
    Bb[2 * r, 2 * r] = 1.3  # B_0 D_0 = 0
    Db[2 * r + 1, 2 * r + 1] = -0.7
    W = random_unitary(rng, 2 * r + n0)
    return W @ Bb @ W.conj().T, W @ Db @ W.conj().T


def test_anticanon_round_trip(rng):
    B, D = anticommuting_pair(rng)
    dec = md.anticommuting_canonical_form(B, D)
    assert dec.rank == 2
    Br, Dr = dec.reconstruct()
    assert opnorm(Br - B) <= 1e-10 and opnorm(Dr - D) <= 1e-10
    W = dec.basis()
    assert np.allclose(W.conj().T @ W, np.eye(W.shape[1]), atol=1e-12)
    for key in ("commutator", "equivalence", "kernel_product"):
        assert dec.residuals[key] <= 1e-10, key
    assert dec.residuals["min_B_minus"] > 0


def test_anticanon_rejects_commuting_pair():
    with pytest.raises(PreconditionError):
        md.anticommuting_canonical_form(np.diag([1.0, 2.0]), np.diag([1.0, 1.0]))


def test_anticanon_trivial_D(rng):
    B = np.diag([1.0, -2.0, 0.0])
    dec = md.anticommuting_canonical_form(B, np.zeros((3, 3)))
    assert dec.rank == 0
    Br, Dr = dec.reconstruct()
    assert np.allclose(Br, B) and np.allclose(Dr, 0)


# Volterra model


SPEC = cp.ContinuousLimitSpec(1.0, lambda x: 0.5 + 0.3 * x, lambda x: 1.0 + 0.5 * np.sin(x))


def test_continuous_roots_conventions():
    w1, w2 = md.continuous_roots([3.0, 0.0], [2.0, 4.0])
    # real pair (-1, -2): w1 is the smaller; complex pair (2i, -2i): w1 is the upper
    assert w1[0] == pytest.approx(-2.0) and w2[0] == pytest.approx(-1.0)
    assert w1[1] == pytest.approx(2j) and w2[1] == pytest.approx(-2j)


def test_volterra_is_chain():
    vm = md.volterra_build(SPEC, 24)
    res = vm.residuals()
    assert res["sum"] <= 1e-14 and res["product"] <= 1e-13
    p_chain, _ = cp.chain_build(vm.chain_spec())
    assert np.allclose(p_chain.A, vm.A, atol=1e-15)
    assert np.allclose(p_chain.phi, vm.phi, atol=1e-15)


def test_volterra_kernel_equation_converges():
    res = [md.kernel_equation_residual(md.volterra_build(SPEC, N)) for N in (16, 32, 64)]
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders >= 0.9)


def test_volterra_char_fn_approaches_limit():
    lam = 1 + 1j
    ref = cp.continuous_limit_eval(SPEC, lam)
    errs = [abs(md.volterra_build(SPEC, N).char_fn(lam) - ref) for N in (16, 32, 64)]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] / abs(ref) <= 1e-3


def test_volterra_kernel_diagonal_matches_closed_form():
    vm = md.volterra_build(SPEC, 16)
    for i in (0, 7, 15):
        x = vm.nodes[i]
        assert vm.kernel[i, i] == pytest.approx(md.closed_form_kernel(SPEC, x, x), abs=1e-12)


def test_volterra_degenerate_roots():
    spec = cp.ContinuousLimitSpec(1.0, 2.0, 1.0)  # b^2 = 4a
    with pytest.raises(KernelSingularError):
        md.volterra_build(spec, 8)


# Riemann boundary problem


def test_riemann_matches_direct_constant_channel():
    r = md.RiemannProblemData(-1.0, 1.0, lambda x: 1.0 + 0 * x, lambda x: 0 * x)
    s_r = md.riemann_charfn_scalar(r, 3j)
    s_d = md.direct_charfn_scalar(r, 3j)
    assert abs(s_r - s_d) <= 5e-3


def test_riemann_zero_channel_is_identity():
    r = md.RiemannProblemData(0.0, 1.0, lambda x: 0 * x, lambda x: 0 * x)
    assert md.riemann_charfn_scalar(r, 1j) == 1


def test_riemann_undefined_on_support():
    r = md.RiemannProblemData(-1.0, 1.0, lambda x: 0.5 + 0 * x, lambda x: 0 * x)
    with pytest.raises(BoundaryProblemUndefinedError):
        md.riemann_charfn_scalar(r, -0.5 + 0j)


def test_riemann_from_samples():
    x = np.linspace(-1, 1, 401)
    r = md.RiemannProblemData.from_samples(x, 0.5 * np.ones_like(x), 0.0)
    r_fn = md.RiemannProblemData(-1.0, 1.0, lambda t: 0.5 + 0 * t, lambda t: 0 * t)
    assert md.riemann_charfn_scalar(r, 2j) == pytest.approx(md.riemann_charfn_scalar(r_fn, 2j), abs=1e-10)
