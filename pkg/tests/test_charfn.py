from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pencilkit import SpectralPointError, ValidationError
from pencilkit import charfn as cf
from pencilkit.samples import random_signature_pencil, scalar_example

from oracles import scalar_charfn, scalar_defect_sign


def test_scalar_example_value():
    S = cf.char_fn(scalar_example(), 1 + 1j)
    assert S.shape == (1, 1)
    assert abs(S[0, 0] - 1 / 3) <= 1e-12


def test_scalar_example_matches_closed_form():
    p = scalar_example()
    for lam in (0.3 + 2j, -1.5 - 0.2j, 4.0 + 0.0j):
        assert cf.char_fn(p, lam)[0, 0] == pytest.approx(scalar_charfn(0.0, 1j, lam), abs=1e-13)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3))
def test_scalar_example_unimodular_on_real_axis(x):
    assert abs(abs(cf.char_fn(scalar_example(), x)[0, 0]) - 1.0) <= 1e-12


def test_v_function_scalar_example():
    vs = cf.v_function(scalar_example(), 1 + 1j)
    assert abs(vs.V[0, 0] - (-1j)) <= 1e-12
    assert vs.identity_verified
    assert vs.identity_residual <= 1e-12


def test_v_function_without_channels():
    from pencilkit import PencilSystem

    p = PencilSystem.from_matrices([[2.0]], [[0.0]])
    vs = cf.v_function(p, 1j)
    assert vs.V.shape == (0, 0)
    assert not vs.identity_verified


def test_char_fn_at_eigenvalue_raises():
    # lam^2 + i = 0 at lam = exp(-i pi / 4)
    with pytest.raises(SpectralPointError):
        cf.char_fn(scalar_example(), np.exp(-0.25j * np.pi))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_metric_relation(seed):
    rng = np.random.default_rng(seed)
    p = random_signature_pencil(rng, 3, 2, [1, -1])
    lam = complex(*rng.uniform(-2, 2, 2)) + 4j
    w = complex(*rng.uniform(-2, 2, 2)) - 4j
    assert cf.metric_relation_residual(p, lam, w) <= 1e-9
    assert cf.v_metric_residual(p, lam, w) <= 1e-9


def test_metric_relation_at_reflection_raises():
    with pytest.raises(SpectralPointError):
        cf.metric_relation_residual(scalar_example(), 1 + 2j, 1 - 2j)


def test_unitary_on_real_axis_for_hermitian_B(rng):
    p = random_signature_pencil(rng, 3, 2, [1, -1])
    J = p.sigma
    for x in np.linspace(-3, 3, 7):
        S = cf.char_fn(p, x + 0.0j)
        assert np.allclose(S.conj().T @ J @ S, J, atol=1e-9)


def test_sign_region_single_factor():
    for lam in (1 + 1j, -3 + 1j, 1 - 1j, -3 - 1j):
        got = cf.sign_region(cf.SignRegionQuery(lam, (2.0,)))
        expect = {1.0: "+", -1.0: "-"}[scalar_defect_sign(2.0, lam)]
        assert got == expect


def test_sign_region_tags():
    q = lambda lam: cf.sign_region(cf.SignRegionQuery(lam, (2.0, -2.0)))  # noqa: E731
    assert q(3.0 + 0j) == "0"
    assert q(0.0 + 1j) == "indeterminate"
    assert q(-1.0 + 1j) == "boundary"
    assert q(1.0 + 1e-12j) == "boundary"
    assert q(5 + 1j) == "+"
    assert q(-5 + 1j) == "-"
    assert q(-5 - 1j) == "+"


def test_sign_region_requires_sorted_b():
    with pytest.raises(ValidationError):
        cf.SignRegionQuery(1j, (1.0, 2.0))
    with pytest.raises(ValidationError):
        cf.SignRegionQuery(1j, ())


def test_sign_of_defect():
    assert cf.sign_of_defect(np.array([[0.5]])) == "+"
    assert cf.sign_of_defect(2.0) == "-"
    assert cf.sign_of_defect(1.0 + 1e-15, tol=1e-12) == "0"


def test_char_fn_grid_keeps_order(rng, monkeypatch):
    p = random_signature_pencil(rng, 3, 1, [1])
    lams = [complex(x, 1.0) for x in np.linspace(-2, 2, 17)]
    serial = cf.char_fn_grid(p, lams, threads=1)
    monkeypatch.setenv("PENCILKIT_THREADS", "4")
    assert cf.thread_count() == 4
    parallel = cf.char_fn_grid(p, lams)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a, b)


def test_thread_count_bad_env(monkeypatch):
    monkeypatch.setenv("PENCILKIT_THREADS", "many")
    assert cf.thread_count() == 1
