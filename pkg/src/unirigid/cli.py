"""Command-line interface.

Reports go to stdout as JSON, matrices and instances to files (or stdout
when no path is given), and log messages to stderr.

Exit codes: 0 success, 2 parse or usage error, 3 no lateration order,
4 singular support system, 5 verification failure or numerical breakdown,
6 dimension mismatch, 7 generator budget exhausted.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import numerics
from .anchored import anchored_stress, verify_anchored_stress
from .exceptions import (BudgetExhausted, DegenerateSpan, DimensionMismatch, NotFound,
                         NumericalBreakdown, ParseError, SingularMatrix, StressError,
                         VerificationFailed)
from .framework import (AnchoredNetwork, check_general_position, format_number,
                        read_framework, write_framework)
from .generate import random_framework, random_network
from .numerics import Tolerances
from .sdp import (check_certificate, export_anchored_sdp, export_realization_sdp,
                  read_matrix_text, read_sdpa, write_sdpa)
from .stress import compute_stress_matrix, verify_stress

log = logging.getLogger("unirigid")

EXIT_OK, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_SINGULAR = 0, 2, 3, 4
EXIT_VERIFY, EXIT_DIMENSION, EXIT_BUDGET = 5, 6, 7


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# I/O helpers


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def matrix_to_json(M) -> dict:
    M = np.asarray(M)
    return {"rows": M.shape[0], "cols": M.shape[1],
            "entries": [[format_number(x) for x in row] for row in M]}


def matrix_from_json(doc) -> np.ndarray:
    try:
        r, c, rows = doc["rows"], doc["cols"], doc["entries"]
    except (KeyError, TypeError):
        raise ParseError("matrix JSON needs rows, cols and entries") from None
    if len(rows) != r or any(len(row) != c for row in rows):
        raise ParseError(f"entries do not match the declared {r}x{c} shape")
    exact = all(isinstance(x, (int, str)) and not isinstance(x, bool) for row in rows for x in row)
    try:
        if exact:
            M = np.empty((r, c), dtype=object)
            for i, row in enumerate(rows):
                for j, x in enumerate(row):
                    M[i, j] = Fraction(x)
            return M
        return np.array(rows, dtype=np.float64).reshape(r, c)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ParseError(f"malformed matrix entry: {exc}") from None


def read_matrix(path) -> np.ndarray:
    """JSON matrix object or the plain "rows cols" text format."""
    text = _read_text(path)
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
        return matrix_from_json(doc)
    return read_matrix_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"


def _emit(report: dict) -> None:
    sys.stdout.write(_dump(report))


# ---------------------------------------------------------------------------
# configuration


def _tolerances(args) -> Tolerances:
    base = Tolerances()
    kw = {f: getattr(args, f) for f in ("tol_solve", "tol_rank", "tol_psd", "tol_sym", "tol_match")
          if getattr(args, f, None) is not None}
    try:
        return Tolerances(**{**base.__dict__, **kw})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _order(args):
    if not args.order:
        return None
    try:
        return tuple(int(t) for t in args.order.split(","))
    except ValueError:
        raise UsageError(f"--order expects comma-separated labels, got {args.order!r}") from None


def _load_instance(args):
    obj = read_framework(_read_text(args.input))
    if args.backend == numerics.RATIONAL and not obj.exact:
        raise UsageError("rational backend requested but the input contains decimal numerals")
    return obj


# ---------------------------------------------------------------------------
# subcommands


def cmd_certify(args) -> int:
    obj = _load_instance(args)
    tol = _tolerances(args)
    order = _order(args)
    if isinstance(obj, AnchoredNetwork):
        if args.full_gp_scan:
            _gp_scan(obj.combined_framework(), args.backend, tol)
        result, steps = anchored_stress(obj, order, args.backend, tol, verify=False)
        report = verify_anchored_stress(result.S, obj, tol)
        out = {"kind": "anchored", "report": report.as_dict(),
               "trace": [{"position": st.position, "sensor": st.sensor} for st in steps],
               "sensor_weights": [[i, j, format_number(w)] for (i, j), w in sorted(result.sensor_weights.items())],
               "anchor_weights": [[k, j, format_number(w)] for (k, j), w in sorted(result.anchor_weights.items())]}
        S = result.S
    else:
        if args.full_gp_scan:
            _gp_scan(obj, args.backend, tol)
        result = compute_stress_matrix(obj, order, args.backend, tol, skip=not args.no_skip,
                                       verify=False, scaling=args.scaling)
        report = verify_stress(result.stress.S, obj, tol)
        out = {"kind": "framework", "report": report.as_dict(), "order": list(result.order.perm),
               "trace": [{"action": a, "position": k} for a, k in result.trace.summary()]}
        S = result.stress.S
    if args.output:
        _write_text(args.output, _dump(matrix_to_json(S)))
    else:
        out["stress"] = matrix_to_json(S)
    if args.trace:
        _write_text(args.trace, _dump(out["trace"]))
    _emit(out)
    if not report.passed:
        log.error("verification failed: %s", ", ".join(report.failures()))
        return EXIT_VERIFY
    return EXIT_OK


def _gp_scan(F, backend, tol):
    gp = check_general_position(F, "full", backend, tol)
    if not gp.ok:
        raise SingularMatrix(f"points {list(gp.subset)} are affinely dependent", subset=list(gp.subset))


def cmd_verify(args) -> int:
    obj = _load_instance(args)
    tol = _tolerances(args)
    S = read_matrix(args.matrix)
    if args.backend == numerics.FLOAT:
        S = numerics.as_backend(S, numerics.FLOAT)
    if isinstance(obj, AnchoredNetwork):
        report = verify_anchored_stress(S, obj, tol)
    else:
        report = verify_stress(S, obj, tol)
    _emit(report.as_dict())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_gen(args) -> int:
    seed = args.seed
    env = os.environ.get("STRESS_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise UsageError(f"STRESS_SEED must be an integer, got {env!r}") from None
    try:
        if args.anchors is not None:
            obj = random_network(args.dim, args.n, args.anchors, seed, tree=args.tree)
        else:
            obj = random_framework(args.dim, args.n, seed, tree=args.tree,
                                   extra_edge_prob=args.extra_edges)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write_text(args.output, write_framework(obj))
    return EXIT_OK


def _problem_for(obj, args):
    if isinstance(obj, AnchoredNetwork):
        return export_anchored_sdp(obj, maximize_trace=args.maximize_trace)
    return export_realization_sdp(obj, maximize_trace=args.maximize_trace)


def cmd_export_sdp(args) -> int:
    obj = _load_instance(args)
    problem = _problem_for(obj, args)
    _write_text(args.output, write_sdpa(problem))
    if args.output not in (None, "-"):
        _emit({"constraints": problem.m, "blocks": problem.block_sizes})
    return EXIT_OK


def cmd_check_cert(args) -> int:
    text = _read_text(args.problem)
    if text.lstrip().startswith("{"):
        obj = read_framework(text)
        problem = _problem_for(obj, args)
    else:
        problem = read_sdpa(text)
    Y, S = read_matrix(args.primal), read_matrix(args.dual)
    if args.backend == numerics.FLOAT:
        Y, S = numerics.as_backend(Y, numerics.FLOAT), numerics.as_backend(S, numerics.FLOAT)
    report = check_certificate(Y, S, problem, _tolerances(args))
    _emit(report.as_dict())
    return EXIT_OK if report.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--backend", choices=[numerics.RATIONAL, numerics.FLOAT],
                   help="arithmetic backend (default: exact when the input is)")
    for name in ("solve", "rank", "psd", "sym", "match"):
        p.add_argument(f"--tol-{name}", type=float, metavar="X")
    p.add_argument("--no-skip", action="store_true", help="process every column, even clean ones")
    p.add_argument("--full-gp-scan", action="store_true",
                   help="check every (d+1)-subset for affine independence up front")
    p.add_argument("--order", help='lateration order override, e.g. "1,2,3,4"')
    p.add_argument("--scaling", choices=["unit", "balanced"], default="unit",
                   help="rank-one update scaling during purification")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="unirigid",
                                     description="Max-rank PSD stress certificates for lateration frameworks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", parents=[common], help="construct and verify a stress matrix")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="stress matrix JSON (default: embedded in the report)")
    p.add_argument("--trace", help="write the step trace JSON here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", parents=[common], help="verify a stress matrix for an instance")
    p.add_argument("input")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", parents=[common], help="generate a random lateration instance")
    p.add_argument("--dim", "-d", type=int, required=True)
    p.add_argument("-n", type=int, required=True, help="vertices, or sensors with --anchors")
    p.add_argument("--anchors", "-m", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tree", action="store_true", help="attach each vertex to an existing clique")
    p.add_argument("--extra-edges", type=float, default=0.0, metavar="PROB")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("export-sdp", parents=[common], help="write the relaxation as SDPA sparse")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--maximize-trace", action="store_true", help="use I.Y as objective instead of 0")
    p.set_defaults(func=cmd_export_sdp)

    p = sub.add_parser("check-cert", parents=[common], help="check a primal/dual certificate pair")
    p.add_argument("problem", help="SDPA file or instance JSON")
    p.add_argument("primal")
    p.add_argument("dual")
    p.add_argument("--maximize-trace", action="store_true")
    p.set_defaults(func=cmd_check_cert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s: %(message)s",
                        level=logging.WARNING - 10 * min(args.verbose, 2))
    try:
        return args.func(args)
    except (UsageError, ParseError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (NotFound, BudgetExhausted) as exc:
        log.error("%s", exc)
        return EXIT_BUDGET if args.command == "gen" else EXIT_NOT_FOUND
    except DegenerateSpan as exc:
        log.error("%s", exc)
        return EXIT_SINGULAR
    except SingularMatrix as exc:
        log.error("%s", exc)
        if exc.subset is not None:
            _emit({"error": "singular", "subset": list(exc.subset)})
        return EXIT_SINGULAR
    except (VerificationFailed, NumericalBreakdown) as exc:
        log.error("%s", exc)
        return EXIT_VERIFY
    except DimensionMismatch as exc:
        log.error("%s", exc)
        return EXIT_DIMENSION
    except StressError as exc:
        log.error("%s", exc)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
