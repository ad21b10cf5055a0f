"""Command line entry point.

Subcommands: ``weave``, ``verify``, ``plan``, ``u1``, ``spectrum``, ``trotter``.
JSON output has sorted keys and floats written with 17 significant digits so
identical invocations give identical bytes.  Relative output paths are
resolved against ``$WEAVEBASIS_OUT_DIR`` when it is set.

Failures print a JSON record ``{"error": {"code", "message", "flag"}}`` to
stderr.  Exit codes: 1 verification failed, 2 usage error, 3 resource cap.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from typing import Optional, Sequence

import numpy as np

from . import numerics
from .plan import (
    HamiltonianShape, Partition, choose_partition, coupling_graph, degree_label,
    parse_degree, plan_report,
)
from .sparse import SparseRowMatrix, format_coordinate, read_coordinate
from .u1 import LatticeGeometry, ModelParams, build_model, model_report, rotate_model
from .weaved import CostLedger, sparsity, verify_weaved, weave_general

OUT_DIR_ENV = "WEAVEBASIS_OUT_DIR"

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: str, message: str, flag: Optional[str] = None,
                 status: int = EXIT_USAGE):
        super().__init__(message)
        self.code, self.message, self.flag, self.status = code, message, flag, status

    def record(self) -> dict:
        return {"error": {"code": self.code, "message": self.message, "flag": self.flag}}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        m = re.search(r"argument (\S+?)[:/ ]", message)
        raise CliError("usage", message, m.group(1) if m else None, EXIT_USAGE)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {text!r}")
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {text!r}")
    return v


def _degree(text: str) -> float:
    try:
        return parse_degree(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'inf', got {text!r}")


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.17g}"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(obj)


def _resolve(path: str) -> str:
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path) and path != "-":
        return os.path.join(base, path)
    return path


def _emit(text: str, path: Optional[str], flag: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = _resolve(path)
    try:
        parent = os.path.dirname(target)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(target, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError("io", f"cannot write {target}: {exc.strerror}", flag, EXIT_USAGE)


def _partition(n: int, subblocks: Optional[int], flag: str = "--subblocks") -> Partition:
    try:
        return choose_partition(n, subblocks)
    except ValueError as exc:
        raise CliError("usage", str(exc), flag, EXIT_USAGE)


def _cmd_weave(args) -> int:
    ledger = CostLedger()
    m = weave_general(args.dim, ledger)
    _emit(format_coordinate(m), args.out, "--out")
    if args.cost:
        sys.stderr.write(f"multiplications {ledger.multiplications}\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    ledger = CostLedger()
    if args.matrix is not None:
        try:
            m = read_coordinate(args.matrix)
        except (OSError, ValueError) as exc:
            raise CliError("input", f"cannot read matrix: {exc}", "--matrix", EXIT_USAGE)
        mults = None
    else:
        m = weave_general(args.dim, ledger)
        mults = ledger.multiplications
    check = verify_weaved(m, args.tol)
    eta = sparsity(m)
    bound = math.ceil(math.log2(m.dim)) + 1 if m.dim > 1 else 1
    report = {
        "dim": m.dim,
        "tol": args.tol,
        "orthogonal": check.orthogonal,
        "uniform_first_column": check.uniform_first_column,
        "column_sums_ok": check.column_sums_ok,
        "max_orthogonality_error": check.max_orthogonality_error,
        "sparsity": eta,
        "sparsity_bound": bound,
        "multiplications": mults,
    }
    _emit(dumps(report) + "\n", args.out, "--out")
    return EXIT_OK if check.ok and eta <= bound else EXIT_FAILED


def _cmd_plan(args) -> int:
    shape = HamiltonianShape(args.n, args.deg_f, args.deg_g, args.deg_F, args.deg_G, args.nq)
    p = _partition(args.n, args.subblocks)
    report = plan_report(shape, p)
    report["degrees"] = {k: degree_label(getattr(shape, "deg_" + k)) for k in ("f", "g", "F", "G")}
    _emit(dumps(report) + "\n", args.out, "--out")
    if args.graph is not None:
        gp = None if args.graph_basis == "original" else p
        _emit(coupling_graph(shape, gp), args.graph, "--graph")
    return EXIT_OK


def _geometry(args) -> LatticeGeometry:
    try:
        return LatticeGeometry(args.nx, args.ny)
    except ValueError as exc:
        raise CliError("usage", str(exc), "--nx", EXIT_USAGE)


def _cmd_u1(args) -> int:
    geo = _geometry(args)
    params = ModelParams(args.g, args.a, args.nq)
    p = _partition(geo.n_plaquettes, args.subblocks)
    report = model_report(geo, params, p)
    _emit(dumps(report) + "\n", args.report, "--report")
    if args.electric_out is not None:
        model = build_model(geo, params)
        a = model.electric.matrix
        if args.electric_basis == "weaved":
            a = rotate_model(model.electric, model.magnetic, p).electric_matrix
        _emit(format_coordinate(SparseRowMatrix.from_dense(a, drop_tol=1e-12)),
              args.electric_out, "--electric-out")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    geo = _geometry(args)
    model = build_model(geo, ModelParams(args.g, args.a, args.nq))
    p = _partition(geo.n_plaquettes, args.subblocks)
    d = numerics.Digitization(args.nq)
    try:
        ev = numerics.spectrum(numerics.build_hamiltonian(model, d, args.mode, p, policy=args.policy))
        report = {
            "lattice": {"nx": geo.nx, "ny": geo.ny, "n_p": geo.n_plaquettes},
            "n_q": args.nq,
            "mode": args.mode,
            "partition": list(p.block_dims),
            "eigenvalues": [float(x) for x in ev],
        }
        if args.mode != numerics.ORIGINAL:
            ref = numerics.spectrum(numerics.build_hamiltonian(model, d, numerics.ORIGINAL))
            rep = numerics.SpectrumReport(ref, ev, args.nq)
            report["deviation"] = {"max_abs_diff": rep.max_abs_diff,
                                   "low_lying_diff": rep.low_lying_diff, "n_low": rep.n_low}
        if args.mode == numerics.ROTATED_REDIGITIZED:
            rot = rotate_model(model.electric, model.magnetic, p)
            layout = numerics.redigitized_layout(rot, d, args.policy)
            report["redigitization"] = {
                "policy": layout.policy, "scale": layout.scale,
                "register_b_max": layout.max_register_eigenvalue,
                "argument_ranges": list(layout.argument_ranges),
            }
    except numerics.ResourceLimitError as exc:
        raise CliError("resource", str(exc), "--nq", EXIT_RESOURCE)
    _emit(dumps(report) + "\n", args.out, "--out")
    return EXIT_OK


def _cmd_trotter(args) -> int:
    geo = _geometry(args)
    model = build_model(geo, ModelParams(args.g, args.a, args.nq))
    p = _partition(geo.n_plaquettes, args.subblocks)
    d = numerics.Digitization(args.nq)
    try:
        rows = numerics.trotter_error_table(model, d, args.t, args.steps, args.basis, p)
    except numerics.ResourceLimitError as exc:
        raise CliError("resource", str(exc), "--nq", EXIT_RESOURCE)
    report = {
        "lattice": {"nx": geo.nx, "ny": geo.ny, "n_p": geo.n_plaquettes},
        "n_q": args.nq, "t": args.t, "basis": args.basis,
        "partition": list(p.block_dims), "table": rows,
    }
    _emit(dumps(report) + "\n", args.out, "--out")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weavebasis", description="Weaved operator-basis change toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("weave", help="build W_M and write it in coordinate format")
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--cost", action="store_true", help="print the multiplication count to stderr")
    p.set_defaults(func=_cmd_weave)

    p = sub.add_parser("verify", help="check orthogonality, first column, column sums, sparsity")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dim", type=_positive_int)
    src.add_argument("--matrix")
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("plan", help="DoC and gate costs for an abstract Hamiltonian")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--nq", type=_positive_int, required=True)
    p.add_argument("--subblocks", type=_positive_int, default=None)
    for name in ("f", "g", "F", "G"):
        p.add_argument(f"--deg-{name}", dest=f"deg_{name}", type=_degree, default=math.inf)
    p.add_argument("--out", default=None)
    p.add_argument("--graph", default=None, help="write the coupling graph in DOT format")
    p.add_argument("--graph-basis", choices=("original", "weaved"), default="weaved")
    p.set_defaults(func=_cmd_plan)

    def lattice_args(p):
        p.add_argument("--nx", type=_positive_int, required=True)
        p.add_argument("--ny", type=_positive_int, required=True)
        p.add_argument("--nq", type=_positive_int, required=True)
        p.add_argument("--g", type=_positive_float, default=1.0)
        p.add_argument("--a", type=_positive_float, default=1.0)
        p.add_argument("--subblocks", type=_positive_int, default=None)

    p = sub.add_parser("u1", help="U(1) plaquette model report")
    lattice_args(p)
    p.add_argument("--report", default=None)
    p.add_argument("--electric-out", default=None)
    p.add_argument("--electric-basis", choices=("original", "weaved"), default="original")
    p.set_defaults(func=_cmd_u1)

    p = sub.add_parser("spectrum", help="dense spectrum of the digitized model")
    lattice_args(p)
    p.add_argument("--mode", choices=numerics.MODES, default=numerics.ORIGINAL)
    p.add_argument("--policy", choices=numerics.RANGE_POLICIES, default=numerics.DEFAULT_POLICY)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("trotter", help="first-order Trotter error against exact evolution")
    lattice_args(p)
    p.add_argument("--t", type=_nonneg_float, required=True)
    p.add_argument("--steps", type=_positive_int, nargs="+", default=[4, 8, 16])
    p.add_argument("--basis", choices=(numerics.ORIGINAL, numerics.WEAVED), default=numerics.ORIGINAL)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_trotter)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(dumps(exc.record()) + "\n")
        return exc.status
    except numerics.ResourceLimitError as exc:
        sys.stderr.write(dumps(CliError("resource", str(exc)).record()) + "\n")
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
