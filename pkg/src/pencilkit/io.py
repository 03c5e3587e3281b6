"""JSON and CSV formats.

Complex scalars are stored as ``[re, im]`` pairs and matrices as lists of
rows of such pairs.  Plain real numbers are accepted on input wherever a
complex scalar is expected.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .core import Colligation, PencilSystem
from .errors import StructuralError

__all__ = [
    "ParseError",
    "decode_complex",
    "decode_vector",
    "decode_matrix",
    "encode_complex",
    "encode_array",
    "load_json",
    "dump_json",
    "colligation_from_dict",
    "colligation_to_dict",
    "pencil_from_dict",
    "pencil_to_dict",
    "format_float",
    "write_csv",
]


class ParseError(ValueError):
    """Input file is not valid JSON or does not follow the expected layout."""


def decode_complex(x: Any) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in x
    ):
        return complex(x[0], x[1])
    raise ParseError(f"expected a number or an [re, im] pair, got {x!r}")


def decode_vector(x: Any) -> np.ndarray:
    if not isinstance(x, (list, tuple)):
        raise ParseError(f"expected a list of complex scalars, got {type(x).__name__}")
    return np.array([decode_complex(e) for e in x], dtype=complex)


def decode_matrix(x: Any) -> np.ndarray:
    """Rows of complex scalars.  ``[]`` decodes to a 0x0 matrix."""
    if not isinstance(x, (list, tuple)):
        raise ParseError(f"expected a list of rows, got {type(x).__name__}")
    rows = [decode_vector(r) for r in x]
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise StructuralError(f"ragged matrix rows with lengths {sorted(width)}")
    return np.vstack(rows) if width != {0} else np.zeros((len(rows), 0), dtype=complex)


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_array(a) -> Any:
    """Nested lists of ``[re, im]`` pairs for arrays of any rank."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return encode_complex(a)
    return [encode_array(e) for e in a]


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def dump_json(obj: Any, path: str | Path | None = None) -> str:
    text = json.dumps(obj, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _require(d: dict, key: str) -> Any:
    if not isinstance(d, dict):
        raise ParseError(f"expected a JSON object, got {type(d).__name__}")
    if key not in d:
        raise ParseError(f"missing key {key!r}")
    return d[key]


def colligation_from_dict(d: dict, check: bool = True) -> Colligation:
    A = decode_matrix(_require(d, "A"))
    phi = decode_matrix(_require(d, "phi"))
    sigma = decode_matrix(_require(d, "sigma"))
    if phi.shape == (0, 0):
        phi = np.zeros((0, A.shape[0]), dtype=complex)
    return Colligation(A, phi, sigma, check=check)


def colligation_to_dict(c: Colligation) -> dict:
    return {"A": encode_array(c.A), "phi": encode_array(c.phi), "sigma": encode_array(c.sigma)}


def pencil_from_dict(d: dict, check: bool = True) -> PencilSystem:
    """PencilSystem from ``{"A", "B", "phi", "sigma"}``.

    ``phi`` and ``sigma`` may be omitted together, in which case they are
    derived from the imaginary part of ``A``.
    """
    A = decode_matrix(_require(d, "A"))
    B = decode_matrix(_require(d, "B"))
    if "phi" not in d and "sigma" not in d:
        return PencilSystem.from_matrices(A, B, check=check)
    return PencilSystem(colligation_from_dict(d, check=check), B, check=check)


def pencil_to_dict(p: PencilSystem) -> dict:
    out = colligation_to_dict(p.colligation)
    out["B"] = encode_array(p.B)
    return out


def format_float(x: float) -> str:
    """17 significant digits in scientific notation (round-trips doubles)."""
    return "%.16e" % x


def write_csv(header: Sequence[str], rows: Iterable[Sequence[float]], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
