"""Command-line front end: ``bngkit <subcommand> ...``.

JSON arguments accept a literal document, a file path, or ``-`` for stdin.
Exit codes: 0 success, 1 precondition failure, 2 verification failure,
3 I/O or schema error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import io
from .certify import (
    calkin_dim,
    certify_calkin,
    certify_matrix,
    ng_bound,
    verify,
)
from .core import (
    VERIFY_TOL,
    ClusteredModel,
    DiagonalUnitary,
    ell,
    ell_ess,
    ell_unitary,
    hs_dist,
    proj_dist,
)
from .decomp import greedy_order, product_decomposition, split_angles, torus_decomposition
from .errors import BngError, SchemaError
from .su2 import su2_chain
from .typeiii import FiniteSpectrumUnitary, commutator, commutator_witness, doubled_commutator

TOL_ENV = "BNGKIT_TOL"


class UsageError(BngError):
    exit_code = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_tolerance() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return VERIFY_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise SchemaError(TOL_ENV, f"not a number: {raw!r}") from None
    if not tol > 0:
        raise SchemaError(TOL_ENV, "tolerance must be positive")
    return tol


def read_json(arg: str, field: str):
    """Parse ``arg`` as inline JSON, ``-`` (stdin) or a file path."""
    if arg == "-":
        text = sys.stdin.read()
    elif arg.lstrip().startswith(("{", "[")):
        text = arg
    else:
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    return io.loads(text, field)


def write_json(doc, out: Optional[str]):
    text = io.dumps(doc)
    if out is None or out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _angles(doc, field: str) -> np.ndarray:
    if isinstance(doc, dict) and "angles" in doc:
        doc = doc["angles"]
    if isinstance(doc, dict) and "phases" in doc:
        doc = doc["phases"]
    return np.array(io._reals(doc, field), dtype=np.float64)


def _length(x) -> float:
    if isinstance(x, DiagonalUnitary):
        return ell(x.phases)
    if isinstance(x, ClusteredModel):
        return ell_ess(x)
    if isinstance(x, FiniteSpectrumUnitary):
        return ell(x.expanded())
    return ell_unitary(x)


def _as_model(x, field: str) -> ClusteredModel:
    if not isinstance(x, ClusteredModel):
        raise SchemaError(field, "expected a clustered model {clusters, exceptional}")
    return x


def _dense(x, field: str):
    if isinstance(x, (DiagonalUnitary, np.ndarray)):
        return x
    if isinstance(x, FiniteSpectrumUnitary):
        return x.matrix()
    raise SchemaError(field, "expected a diagonal unitary or a dim/re/im matrix")


# -- subcommands ----------------------------------------------------------------------


def cmd_length(args) -> int:
    x = io.operator_from_json(read_json(args.input, "input"), "input")
    print(repr(_length(x)))
    return 0


def cmd_dist(args) -> int:
    u = _dense(io.operator_from_json(read_json(args.u, "u"), "u"), "u")
    v = _dense(io.operator_from_json(read_json(args.v, "v"), "v"), "v")
    if args.kind == "hs":
        if not (isinstance(u, DiagonalUnitary) and isinstance(v, DiagonalUnitary)):
            raise SchemaError("u", "hs distance takes diagonal unitaries")
        print(repr(hs_dist(u, v)))
    else:
        print(repr(proj_dist(u, v)))
    return 0


def cmd_decompose(args) -> int:
    doc = read_json(args.input, "input")
    if args.kind == "product":
        seq = product_decomposition(_angles(doc, "input"))
    else:
        seq = torus_decomposition(io.diagonal_from_json(doc, "input"))
    write_json(io.factor_sequence_to_json(seq), args.out)
    return 0


def cmd_order(args) -> int:
    a = _angles(read_json(args.input, "input"), "input")
    perm = greedy_order(a)
    prefix = np.cumsum(a[perm]) if a.size else np.zeros(0)
    bound = float(np.max(np.abs(prefix))) if a.size else 0.0
    write_json({"order": perm.tolist(), "prefix_bound": bound}, args.out)
    return 0


def cmd_split(args) -> int:
    first, second = split_angles(_angles(read_json(args.input, "input"), "input"))
    write_json({"first": first.tolist(), "second": second.tolist()}, args.out)
    return 0


def cmd_su2(args) -> int:
    write_json(io.chain_to_json(su2_chain(args.theta, args.phi, args.m)), args.out)
    return 0


def cmd_certify(args) -> int:
    tol = args.tol if args.tol is not None else default_tolerance()
    u = io.operator_from_json(read_json(args.u, "u"), "u")
    v = _as_model(io.operator_from_json(read_json(args.v, "v"), "v"), "v")
    if args.mode == "calkin":
        u = _as_model(u, "u")
        dim = calkin_dim(u, v, args.N) if args.N is not None else None
        cert = certify_calkin(u, v, dim, tol)
    else:
        cert = certify_matrix(_dense(u, "u"), v, args.m, tol)
    write_json(io.certificate_to_json(cert), args.out)
    return 0


def cmd_verify(args) -> int:
    tol = args.tol if args.tol is not None else default_tolerance()
    cert = io.certificate_from_json(read_json(args.cert, "cert"), "cert")
    report = verify(cert, tol)
    write_json(report.to_json(), args.out)
    return 0 if report.passed else 2


def cmd_commutator_witness(args) -> int:
    u = io.operator_from_json(read_json(args.input, "input"), "input")
    if not isinstance(u, FiniteSpectrumUnitary):
        raise SchemaError("input", "expected {eigenphases, basis}")
    w, ratio = commutator_witness(u)
    doc = {
        "witness": io.matrix_to_json(w),
        "commutator": io.matrix_to_json(commutator(u.matrix(), w)),
        "ratio": ratio,
    }
    write_json(doc, args.out)
    return 0


def cmd_doubled_commutator(args) -> int:
    tol = args.tol if args.tol is not None else 1e-8
    v0 = _matrix(_dense(io.operator_from_json(read_json(args.v0, "v0"), "v0"), "v0"))
    w0 = _matrix(_dense(io.operator_from_json(read_json(args.w0, "w0"), "w0"), "w0"))
    _, cert = doubled_commutator(v0, w0, tol)
    write_json(io.certificate_to_json(cert), args.out)
    return 0


def _matrix(x):
    return x.matrix() if isinstance(x, DiagonalUnitary) else x


def cmd_bound(args) -> int:
    if (args.input is None) == (args.length is None):
        raise UsageError("bound: give exactly one of --input or --length")
    if args.length is not None:
        x = args.length
    else:
        x = io.operator_from_json(read_json(args.input, "input"), "input")
        if isinstance(x, FiniteSpectrumUnitary):
            x = x.matrix()
    print(ng_bound(x, args.mode))
    return 0


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    outcomes = run_all(args.seed, args.jobs)
    for o in outcomes:
        print(o.line())
    failed = [o for o in outcomes if not o.passed]
    print(f"{len(outcomes) - len(failed)}/{len(outcomes)} criteria passed")
    return 2 if failed else 0


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bngkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text, out=False):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=fn)
        if out:
            sp.add_argument("--out", default="-", help="output path, '-' for stdout")
        return sp

    sp = add("length", cmd_length, "print ell (ell_ess for clustered models)")
    sp.add_argument("--input", required=True)

    sp = add("dist", cmd_dist, "projective or truncated HS distance")
    sp.add_argument("--u", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--kind", choices=("proj", "hs"), default="proj")

    sp = add("decompose", cmd_decompose, "product or torus decomposition", out=True)
    sp.add_argument("--kind", choices=("product", "torus"), required=True)
    sp.add_argument("--input", required=True)

    sp = add("order", cmd_order, "greedy balancing order of a zero-sum sequence", out=True)
    sp.add_argument("--input", required=True)

    sp = add("split", cmd_split, "alternating split of a block angle sequence", out=True)
    sp.add_argument("--input", required=True)

    sp = add("su2", cmd_su2, "SU(2) conjugate chain", out=True)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--phi", type=float, required=True)
    sp.add_argument("--m", type=int, required=True)

    sp = add("certify", cmd_certify, "generate and self-check a certificate", out=True)
    sp.add_argument("--mode", choices=("matrix", "calkin"), required=True)
    sp.add_argument("--u", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--m", type=int, help="matrix mode: override the minimal m")
    sp.add_argument("--N", type=int, help="calkin mode: smallest admissible truncation dimension")
    sp.add_argument("--tol", type=float)

    sp = add("verify", cmd_verify, "independently verify a certificate", out=True)
    sp.add_argument("--cert", required=True)
    sp.add_argument("--tol", type=float)

    sp = add("commutator-witness", cmd_commutator_witness, "v with ell(u) <= 4 ell([u, v])", out=True)
    sp.add_argument("--input", required=True)

    sp = add("doubled-commutator", cmd_doubled_commutator, "4-factor certificate for [v0,w0] + its inverse", out=True)
    sp.add_argument("--v0", required=True)
    sp.add_argument("--w0", required=True)
    sp.add_argument("--tol", type=float)

    sp = add("bound", cmd_bound, "normal generation bound")
    sp.add_argument("--mode", choices=("calkin", "typeiii"), required=True)
    sp.add_argument("--input")
    sp.add_argument("--length", type=float)

    sp = add("selftest", cmd_selftest, "run the acceptance suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        tol = getattr(args, "tol", None)
        if tol is not None and not tol > 0:
            raise UsageError("--tol must be positive")
        if getattr(args, "N", None) is not None and args.N < 2:
            raise UsageError("--N must be at least 2")
        return args.func(args)
    except BngError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if getattr(exc, "suggested_dim", None) is not None:
            print(f"hint: try --N {exc.suggested_dim}", file=sys.stderr)
        report = getattr(exc, "report", None)
        if report is not None:
            sys.stdout.write(io.dumps(report.to_json()) + "\n")
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
