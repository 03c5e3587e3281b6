from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pencilkit import StructuralError, ValidationError
from pencilkit import io as pio
from pencilkit.samples import random_signature_pencil, scalar_example

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(re=finite, im=finite)
def test_complex_round_trip(re, im):
    z = complex(re, im)
    assert pio.decode_complex(pio.encode_complex(z)) == z


def test_decode_complex_forms():
    assert pio.decode_complex(2) == 2 + 0j
    assert pio.decode_complex([1.5, -2]) == 1.5 - 2j
    for bad in ("1+2j", [1, 2, 3], True, None):
        with pytest.raises(pio.ParseError):
            pio.decode_complex(bad)


def test_decode_matrix():
    assert pio.decode_matrix([]).shape == (0, 0)
    M = pio.decode_matrix([[1, [0, 1]], [2, 3]])
    assert M[0, 1] == 1j and M.shape == (2, 2)
    with pytest.raises(StructuralError):
        pio.decode_matrix([[1, 2], [3]])
    with pytest.raises(pio.ParseError):
        pio.decode_matrix("x")


def test_pencil_round_trip(rng, tmp_path):
    p = random_signature_pencil(rng, 3, 2, [1, -1])
    path = tmp_path / "p.json"
    pio.dump_json(pio.pencil_to_dict(p), path)
    q = pio.pencil_from_dict(pio.load_json(path))
    assert np.array_equal(p.A, q.A) and np.array_equal(p.B, q.B)
    assert np.array_equal(p.phi, q.phi) and np.array_equal(p.sigma, q.sigma)


def test_pencil_without_channels_is_derived():
    d = {"A": [[[0, 1]]], "B": [[0]]}
    p = pio.pencil_from_dict(d)
    assert p.phi.shape == (1, 1)
    assert abs(p.phi[0, 0]) ** 2 == pytest.approx(2.0)


def test_pencil_from_dict_errors(tmp_path):
    with pytest.raises(pio.ParseError):
        pio.pencil_from_dict({"A": [[1]]})
    with pytest.raises(ValidationError):
        pio.pencil_from_dict({"A": [[[0, 1]]], "B": [[0]], "phi": [[1]], "sigma": [[1]]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(pio.ParseError):
        pio.load_json(bad)


def test_bundled_scalar_example_matches_sample():
    from importlib import resources

    d = json.loads(resources.files("pencilkit").joinpath("data/scalar_example.json").read_text())
    p = pio.pencil_from_dict(d)
    q = scalar_example()
    assert np.allclose(p.A, q.A) and np.allclose(p.phi, q.phi)


def test_csv_round_trips_doubles():
    x = 0.1 + 1e-17
    text = pio.write_csv(["a"], [[x]])
    assert float(text.splitlines()[1]) == x
