"""Command-line front end.

Exit codes: 0 success, 1 a ``verify`` check failed, 2 unreadable or
malformed input, 3 data that fails validation, 4 a numerical failure
(spectral point, no convergence, invalid split).
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import charfn as cf
from . import coupling as cp
from . import dynamics as dy
from . import factor as fa
from . import io as pio
from . import models
from .core import opnorm, validate_colligation
from .errors import NumericalError, PencilError, StructuralError, ValidationError
from .samples import random_gap_pencil, random_signature_pencil

__all__ = ["main", "build_parser", "parse_grid", "verify_suite"]

EXIT_OK, EXIT_CHECK_FAILED, EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 2 like argparse, but keep the message on stderr
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _positive(kind: Callable[[str], float]) -> Callable[[str], float]:
    def conv(s: str):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v

    return conv


def parse_complex(s: str) -> complex:
    """``"re,im"`` or any literal accepted by :class:`complex` (``"1+2j"``)."""
    try:
        if "," in s:
            re_, im_ = s.split(",")
            return complex(float(re_), float(im_))
        return complex(s.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from None


def parse_grid(spec: str) -> np.ndarray:
    """``"re0:re1:n,im0:im1:m"`` to a row-major array of ``n*m`` points (real part varies slowest)."""
    try:
        re_part, im_part = spec.split(",")
        r0, r1, n = re_part.split(":")
        i0, i1, m = im_part.split(":")
        n, m = int(n), int(m)
        if n < 1 or m < 1:
            raise ValueError
        re = np.linspace(float(r0), float(r1), n)
        im = np.linspace(float(i0), float(i1), m)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like re0:re1:n,im0:im1:m, got {spec!r}") from None
    return (re[:, None] + 1j * im[None, :]).ravel()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pencilkit", description="Quadratic pencils of colligations: roots, dynamics, characteristic functions and models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("factor", help="spectral roots X, Y and coupling operator K")
    f.add_argument("input", help="PencilSystem JSON")
    f.add_argument("--split", default="gap", choices=list(fa.SPLIT_RULES))
    f.add_argument("--method", default="schur", choices=["schur", "bernoulli"])
    f.add_argument("--complement", action="store_true", help="give X the other half of the spectrum")
    f.add_argument("-o", "--output")

    c = sub.add_parser("charfn", help="characteristic function on a rectangular grid")
    c.add_argument("input", help="PencilSystem JSON")
    c.add_argument("--grid", required=True, type=parse_grid, help="re0:re1:n,im0:im1:m")
    c.add_argument("-o", "--output")

    s = sub.add_parser("simulate", help="solve the Cauchy problem and report the energy balance")
    s.add_argument("input", help='JSON with "system", "h0", "h1" and optional "input"')
    s.add_argument("--T", type=_positive(float), default=1.0)
    s.add_argument("--dt", type=_positive(float), default=1e-3)
    s.add_argument("--solver", default="factored", choices=["factored", "rk4"])
    s.add_argument("--split", default="gap", choices=list(fa.SPLIT_RULES))
    s.add_argument("-o", "--output")

    k = sub.add_parser("couple", help="couple two PencilSystems")
    k.add_argument("first")
    k.add_argument("second")
    k.add_argument("-o", "--output")

    ch = sub.add_parser("chain", help="scalar chain or continuous limit on a grid")
    ch.add_argument("input", help='JSON with "factors" or "continuous"')
    ch.add_argument("--grid", required=True, type=parse_grid)
    ch.add_argument("-o", "--output")

    m = sub.add_parser("model", help="discretized functional models")
    msub = m.add_subparsers(dest="model", required=True, parser_class=_Parser)
    for name, helptext in (
        ("hilbert", "Hilbert-transform root and model quadruple"),
        ("stieltjes", "Stieltjes-type anti-commutator solution"),
        ("anticanon", "canonical form of an anti-commuting pair"),
    ):
        mm = msub.add_parser(name, help=helptext)
        mm.add_argument("input")
        mm.add_argument("-o", "--output")
    mv = msub.add_parser("volterra", help="Volterra model of a continuous chain")
    mv.add_argument("input", help='JSON with "l", "b", "a"')
    mv.add_argument("--nodes", type=_positive(int), default=64)
    mv.add_argument("--lambda", dest="lam", type=parse_complex, default=None, help="also compare S at this point")
    mv.add_argument("-o", "--output")
    mr = msub.add_parser("riemann", help="scalar characteristic function through the boundary problem")
    mr.add_argument("input", help='JSON with "x", "v", "b" samples and optional "J"')
    mr.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    mr.add_argument("--quad", type=_positive(int), default=256)
    mr.add_argument("--grid-nodes", type=_positive(int), default=512)
    mr.add_argument("-o", "--output")

    v = sub.add_parser("verify", help="run the identity suite and print a pass/fail table")
    v.add_argument("input", nargs="?", help="PencilSystem JSON (default: bundled scalar example)")
    v.add_argument("--random", type=int, default=0, metavar="N", help="also check N seeded random instances")
    v.add_argument("--seed", type=int, default=0)
    return p


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _factored_json(f: fa.FactoredPencil) -> dict:
    return {
        "method": f.method,
        "X": pio.encode_array(f.X),
        "Y": pio.encode_array(f.Y),
        "K": pio.encode_array(f.K),
        "specX": pio.encode_array(np.array(f.specX.eigenvalues)),
        "specY": pio.encode_array(np.array(f.specY.eigenvalues)),
        "separation": f.separation,
        "residuals": f.residuals(),
    }


def _cmd_factor(args) -> int:
    p = pio.pencil_from_dict(pio.load_json(args.input))
    if args.method == "bernoulli":
        f = fa.factor_bernoulli(p)
    else:
        f = fa.factor_spectral(p, args.split, complement=args.complement)
    _emit(pio.dump_json(_factored_json(f)), args.output)
    return EXIT_OK


def _complex_columns(prefix: str, shape: tuple[int, ...]) -> list[str]:
    names = []
    for idx in np.ndindex(*shape):
        tag = prefix + "".join(str(i + 1) for i in idx)
        names += [tag + "_re", tag + "_im"]
    return names


def _cmd_charfn(args) -> int:
    p = pio.pencil_from_dict(pio.load_json(args.input))
    lams = args.grid
    values = cf.char_fn_grid(p, lams)
    m = p.colligation.dimE
    header = ["re_lambda", "im_lambda"] + _complex_columns("S", (m, m)) + ["one_minus_norm2"]
    rows = []
    for lam, S in zip(lams, values):
        row = [lam.real, lam.imag]
        for z in S.ravel():
            row += [z.real, z.imag]
        row.append(1.0 - opnorm(S) ** 2)
        rows.append(row)
    _emit(pio.write_csv(header, rows), args.output)
    return EXIT_OK


def _signal_from_dict(d) -> dy.Signal | None:
    if d is None:
        return None
    kind = d.get("type") if isinstance(d, dict) else None
    if kind == "plane":
        return dy.PlaneWave(pio.decode_complex(d["lambda"]), pio.decode_vector(d["u0"]))
    if kind == "sampled":
        times = np.asarray(d["times"], dtype=float)
        values = pio.decode_matrix(d["values"])
        return dy.SampledSignal(times, values)
    raise pio.ParseError('input must be null or have "type": "plane" | "sampled"')


def _cmd_simulate(args) -> int:
    d = pio.load_json(args.input)
    if not isinstance(d, dict) or "system" not in d:
        raise pio.ParseError('simulate input needs a "system" object')
    p = pio.pencil_from_dict(d["system"])
    zero = [0.0] * p.n
    h0 = pio.decode_vector(d.get("h0", zero))
    h1 = pio.decode_vector(d.get("h1", zero))
    sim = dy.SimulationInput(p, h0, h1, _signal_from_dict(d.get("input")), args.T, args.dt)
    traj = dy.simulate(sim, args.solver, args.split)
    rep = dy.conservation_report(traj, p, derivative="fd")
    n, m = p.n, p.colligation.dimE
    header = ["t"] + _complex_columns("h", (n,)) + _complex_columns("v", (m,)) + ["conservation_residual"]
    rows = []
    for k, t in enumerate(traj.times):
        row = [t]
        for z in traj.h[k]:
            row += [z.real, z.imag]
        for z in traj.v[k]:
            row += [z.real, z.imag]
        row.append(rep.residual[k])
        rows.append(row)
    _emit(pio.write_csv(header, rows), args.output)
    return EXIT_OK


def _cmd_couple(args) -> int:
    p1 = pio.pencil_from_dict(pio.load_json(args.first))
    p2 = pio.pencil_from_dict(pio.load_json(args.second))
    c = cp.couple(p1, p2)
    _emit(pio.dump_json(pio.pencil_to_dict(c.system)), args.output)
    return EXIT_OK


def _chain_from_dict(d) -> cp.ChainSpec:
    factors = d.get("factors")
    if not isinstance(factors, list):
        raise pio.ParseError('"factors" must be a list')
    out = []
    for item in factors:
        if not isinstance(item, dict) or "b" not in item or "lambda" not in item:
            raise pio.ParseError('each factor needs "b" and "lambda"')
        out.append(cp.ChainFactor(float(item["b"]), pio.decode_complex(item["lambda"])))
    return cp.ChainSpec(tuple(out))


def _continuous_from_dict(d) -> cp.ContinuousLimitSpec:
    try:
        return cp.ContinuousLimitSpec(float(d["l"]), [float(x) for x in np.atleast_1d(d["b"])],
                                      [float(x) for x in np.atleast_1d(d["a"])])
    except (KeyError, TypeError) as exc:
        raise pio.ParseError(f'continuous spec needs numeric "l", "b", "a" ({exc})') from None


def _cmd_chain(args) -> int:
    d = pio.load_json(args.input)
    if not isinstance(d, dict):
        raise pio.ParseError("chain input must be a JSON object")
    if "factors" in d:
        spec = _chain_from_dict(d)
        evaluate = lambda z: cp.blaschke_product_eval(spec, z)  # noqa: E731
    elif "continuous" in d:
        cspec = _continuous_from_dict(d["continuous"])
        evaluate = lambda z: cp.continuous_limit_eval(cspec, z)  # noqa: E731
    else:
        raise pio.ParseError('chain input needs "factors" or "continuous"')
    rows = []
    for lam in args.grid:
        S = evaluate(lam)
        rows.append([lam.real, lam.imag, S.real, S.imag, 1.0 - abs(S) ** 2])
    _emit(pio.write_csv(["re_lambda", "im_lambda", "S_re", "S_im", "one_minus_abs2"], rows), args.output)
    return EXIT_OK


def _grid_from_dict(d) -> tuple[models.GridModel, dict]:
    try:
        nodes = np.asarray(d["nodes"], dtype=float)
        weights = np.asarray(d.get("weights", np.ones_like(nodes)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise pio.ParseError(f'model input needs numeric "nodes" ({exc})') from None
    v = pio.decode_matrix(d["v"]) if "v" in d else None
    J = np.asarray(d["J"], dtype=float) if "J" in d else None
    b = np.asarray(d["b"], dtype=float) if "b" in d else None
    return models.GridModel(nodes, weights, mult_b=b, v=v, J=J), d


def _cmd_model(args) -> int:
    d = pio.load_json(args.input)
    if not isinstance(d, dict):
        raise pio.ParseError("model input must be a JSON object")
    out: dict
    if args.model in ("hilbert", "stieltjes"):
        g, _ = _grid_from_dict(d)
        K = models.kernel_from_channels(g)
        if args.model == "hilbert":
            n_mult = np.asarray(d["n"], dtype=float) if "n" in d else None
            X = models.hilbert_root(g, K, n_mult)
            q = models.model_quadruple(g, K)
            comm = q.X @ q.B - q.B @ q.X
            off = K.weighted(g) - np.diag(np.diag(K.weighted(g)))
            out = {
                "hilbert_root": pio.encode_array(X),
                "X": pio.encode_array(q.X),
                "B": pio.encode_array(q.B),
                "Y": pio.encode_array(q.Y),
                "A": pio.encode_array(q.A),
                "commutator_residual": opnorm(comm - 1j * off),
            }
        else:
            D = models.stieltjes_anticommutator(g, K)
            Bm = np.diag(g.nodes)
            out = {"D": pio.encode_array(D), "anticommutator_residual": opnorm(D @ Bm + Bm @ D + K.weighted(g))}
    elif args.model == "anticanon":
        B = pio.decode_matrix(d.get("B", []))
        D = pio.decode_matrix(d.get("D", []))
        dec = models.anticommuting_canonical_form(B, D)
        out = {
            "G_plus": pio.encode_array(dec.G_plus),
            "G_minus": pio.encode_array(dec.G_minus),
            "G_0": pio.encode_array(dec.G_0),
            "B_minus": pio.encode_array(dec.B_minus),
            "Gamma_abs": pio.encode_array(dec.Gamma_abs),
            "V": pio.encode_array(dec.V),
            "B_0": pio.encode_array(dec.B_0),
            "D_0": pio.encode_array(dec.D_0),
            "residuals": {k: float(v) for k, v in dec.residuals.items()},
        }
    elif args.model == "volterra":
        spec = _continuous_from_dict(d)
        vm = models.volterra_build(spec, args.nodes)
        out = {
            "nodes": vm.nodes.tolist(),
            "A": pio.encode_array(vm.A),
            "B": pio.encode_array(vm.B),
            "X": pio.encode_array(vm.X),
            "Y": pio.encode_array(vm.Y),
            "residuals": vm.residuals(),
            "kernel_equation_residual": models.kernel_equation_residual(vm),
        }
        if args.lam is not None:
            out["S_model"] = pio.encode_complex(vm.char_fn(args.lam))
            out["S_limit"] = pio.encode_complex(cp.continuous_limit_eval(spec, args.lam))
    else:  # riemann
        try:
            x = np.asarray(d["x"], dtype=float)
            v = pio.decode_vector(d["v"])
            b = np.asarray(d.get("b", 0.0), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise pio.ParseError(f'riemann input needs "x" and "v" samples ({exc})') from None
        r = models.RiemannProblemData.from_samples(x, v, b, float(d.get("J", 1.0)), args.quad)
        s_r = models.riemann_charfn_scalar(r, args.lam)
        s_d = models.direct_charfn_scalar(r, args.lam, args.grid_nodes)
        out = {"lambda": pio.encode_complex(args.lam), "S_riemann": pio.encode_complex(s_r),
               "S_direct": pio.encode_complex(s_d), "difference": abs(s_r - s_d)}
    _emit(pio.dump_json(out), args.output)
    return EXIT_OK


def verify_suite(p, rng: np.random.Generator, label: str, n_points: int = 5) -> list[tuple[str, str, float, float]]:
    """Identity checks on one pencil: rows of ``(instance, check, value, tolerance)``."""
    rows = []
    rep = validate_colligation(p.colligation)
    rows.append((label, "colligation defect", rep.defect_residual, max(rep.tolerance, 1e-14)))
    f = fa.factor_spectral(p, "gap") if _has_real_gap(p) else fa.factor_spectral(p, "halfplane-im")
    scale = fa.pencil_scale(p)
    res = f.residuals()
    rows.append((label, "right root X^2+BX+A", res["right_root"], 1e-9 * scale))
    rows.append((label, "left root Y^2+YB+A", res["left_root"], 1e-9 * scale))
    rows.append((label, "KY-XK-I", res["sylvester"], 1e-10 * max(1.0, opnorm(f.K)) * max(1.0, opnorm(f.X) + opnorm(f.Y))))
    pts = _probe_points(f, rng, n_points)
    metric = max(cf.metric_relation_residual(p, lam, w) for lam, w in zip(pts, pts[::-1] + 0.37j))
    rows.append((label, "metric relation", metric, 1e-9 * scale))
    c = cp.couple(p, p)
    mult = max(opnorm(cf.char_fn(c.system, z) - cf.char_fn(p, z) @ cf.char_fn(p, z)) for z in pts)
    rows.append((label, "multiplicativity", mult, 1e-10 * scale))
    return rows


def _has_real_gap(p) -> bool:
    re = np.sort(p.eigenvalues().real)[::-1]
    n = p.n
    return n > 0 and re[n - 1] - re[n] > fa.SEP_MIN


def _probe_points(f: fa.FactoredPencil, rng: np.random.Generator, k: int) -> np.ndarray:
    eig = np.concatenate([np.array(f.specX.eigenvalues), np.array(f.specY.eigenvalues)])
    R = 1.0 + float(np.max(np.abs(eig))) if eig.size else 1.0
    pts = []
    while len(pts) < k:
        z = complex(rng.uniform(-R, R), rng.uniform(-R, R))
        if eig.size == 0 or np.min(np.abs(eig - z)) > 0.1:
            pts.append(z)
    return np.array(pts)


def _cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.input:
        base = pio.pencil_from_dict(pio.load_json(args.input))
        label = Path(args.input).name
    else:
        text = resources.files("pencilkit").joinpath("data/scalar_example.json").read_text(encoding="utf-8")
        base = pio.pencil_from_dict(json.loads(text))
        label = "scalar-example"
    rows = verify_suite(base, rng, label)
    for k in range(args.random):
        n = int(rng.integers(2, 6))
        p = random_gap_pencil(rng, n) if k % 2 == 0 else random_signature_pencil(rng, n, 2, [1.0, -1.0])
        rows += verify_suite(p, rng, f"random-{k}")
    ok_all = True
    width = max(len(r[0]) for r in rows)
    print(f"{'instance':<{width}}  {'check':<22}  {'value':>10}  {'tolerance':>10}  result")
    for inst, name, val, tol in rows:
        ok = bool(val <= tol)
        ok_all &= ok
        print(f"{inst:<{width}}  {name:<22}  {val:10.3e}  {tol:10.3e}  {'PASS' if ok else 'FAIL'}")
    print("all checks passed" if ok_all else "some checks FAILED")
    return EXIT_OK if ok_all else EXIT_CHECK_FAILED


_COMMANDS = {
    "factor": _cmd_factor,
    "charfn": _cmd_charfn,
    "simulate": _cmd_simulate,
    "couple": _cmd_couple,
    "chain": _cmd_chain,
    "model": _cmd_model,
    "verify": _cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (pio.ParseError, OSError, UnicodeDecodeError, KeyError, TypeError) as exc:
        print(f"pencilkit: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, StructuralError) as exc:
        print(f"pencilkit: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"pencilkit: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PencilError as exc:
        print(f"pencilkit: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
