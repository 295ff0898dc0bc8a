"""Command-line front end.

Exit codes: 0 on success, 1 when a precondition fails (bad parameter,
unsupported field, unreadable Gram file), 2 when every twist candidate fails
exact validation.  Records are written as JSON, one object per line for
``scan``; ``--no-timing`` drops the timing fields so that repeated runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

import mpmath

from . import __version__
from .field_core import FieldError, RealField
from .lattice_analyze import LatticeError, classify
from .lattice_build import (
    DEFAULT_PRECISION_BITS,
    TwistError,
    TwistValidationError,
    build_quadratic,
    build_quartic,
    det_via_formula,
    exact_det,
)
from .quat_algebra import OrderError, order_disc_norm

PRECISION_ENV = "QUATLATTICE_PRECISION"

EXIT_OK = 0
EXIT_PRECONDITION = 1
EXIT_VALIDATION = 2


class GramParseError(ValueError):
    pass


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return DEFAULT_PRECISION_BITS
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{PRECISION_ENV} must be an integer, got {raw!r}")


# ---------------------------------------------------------------------------
# Gram files


def read_gram(path: str) -> list[list[int]]:
    """Parse ``dimension`` on the first line, then that many integer rows."""
    try:
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip()]
    except OSError as exc:
        raise GramParseError(f"cannot read {path}: {exc.strerror}") from None
    if not lines:
        raise GramParseError(f"{path}: empty file")
    try:
        n = int(lines[0][0])
        rows = [[int(x) for x in ln] for ln in lines[1:]]
    except ValueError as exc:
        raise GramParseError(f"{path}: {exc}") from None
    if len(lines[0]) != 1 or n < 1:
        raise GramParseError(f"{path}: first line must be a single positive dimension")
    if len(rows) != n or any(len(r) != n for r in rows):
        raise GramParseError(f"{path}: expected {n} rows of {n} integers")
    return rows


def format_gram(G) -> str:
    rows = [[_as_int(x) for x in row] for row in G]
    return "\n".join([str(len(rows))] + [" ".join(map(str, r)) for r in rows]) + "\n"


def _as_int(x):
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise ValueError(f"non-integral Gram entry {x}")
        return x.numerator
    return int(x)


# ---------------------------------------------------------------------------
# records


def field_descriptor(field: RealField) -> dict:
    return {
        "kind": field.kind,
        "parameter": field.parameter,
        "degree": field.degree,
        "min_poly": [str(c) for c in field.min_poly],
        "field_disc": field.field_disc,
        "integral_basis": [[str(c) for c in b] for b in field.integral_basis],
        "index": str(field.index),
    }


def _max_relative_deviation(lattice, G, precision_bits: int) -> str:
    M = lattice.generator_matrix(precision_bits)
    approx = M.gram()
    worst = mpmath.mpf(0)
    with mpmath.workprec(precision_bits):
        for i, row in enumerate(G):
            for j, exact in enumerate(row):
                e = mpmath.mpf(exact.numerator) / exact.denominator
                dev = abs(approx[i][j] - e) / max(abs(e), 1)
                worst = max(worst, dev)
        return mpmath.nstr(worst, 6)


def construct_record(family: str, parameter: int, method: str = "auto",
                     precision_bits: int = DEFAULT_PRECISION_BITS,
                     theta_bound: int | None = None, timing: bool = True) -> dict:
    """Build, analyze and classify one lattice; raises the library errors unchanged."""
    t0 = time.perf_counter()
    if family == "quadratic":
        lat = build_quadratic(parameter, method)
    else:
        lat = build_quartic(parameter)
    t1 = time.perf_counter()
    G = lat.gram()
    report = classify(G, theta_bound=theta_bound)
    t2 = time.perf_counter()
    formula = det_via_formula(lat.order, lat.alpha)
    record = {
        "command": ["construct", family, str(parameter)],
        "field": field_descriptor(lat.field),
        "order": {
            "provenance": lat.order.provenance,
            "generators": [[[str(c) for c in x.coords] for x in g.coords]
                           for g in lat.order.generators],
            "disc_norm": order_disc_norm(lat.order).value,
        },
        "alpha": [str(c) for c in lat.alpha.coords],
        "expected_class": lat.expected_class,
        "selection_log": _jsonable_log(lat.selection_log),
        "gram": [[_as_int(x) for x in row] for row in G],
        "report": report.to_dict(),
        "det_via_formula": str(formula),
        "gram_det": str(exact_det(G)),
        "precision_bits": precision_bits,
        "max_relative_deviation": _max_relative_deviation(lat, G, precision_bits),
    }
    if timing:
        record["timing"] = {"build": round(t1 - t0, 4), "analyze": round(t2 - t1, 4)}
    return record


def analyze_record(path: str, theta_bound: int | None = None) -> dict:
    G = read_gram(path)
    report = classify(G, theta_bound=theta_bound)
    return {"command": ["analyze", os.path.basename(path)], "gram": G, "report": report.to_dict()}


def _jsonable_log(entries):
    out = []
    for e in entries:
        out.append({k: v if isinstance(v, (bool, int, str, type(None))) else str(v)
                    for k, v in e.items()})
    return out


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# ---------------------------------------------------------------------------
# commands


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_construct(args) -> int:
    try:
        rec = construct_record(args.family, args.parameter, args.method, args.precision,
                               args.theta_bound, timing=not args.no_timing)
    except TwistValidationError as exc:
        print(_dump({"error": str(exc), "diagnostics": _jsonable_log(exc.diagnostics)}))
        return _fail(EXIT_VALIDATION, str(exc))
    except (FieldError, OrderError, TwistError, OverflowError) as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    if args.gram_out:
        with open(args.gram_out, "w") as fh:
            fh.write(format_gram(rec["gram"]))
    if args.format == "text":
        sys.stdout.write(format_gram(rec["gram"]))
    else:
        print(_dump(rec))
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        rec = analyze_record(args.gram_file, args.theta_bound)
    except (GramParseError, LatticeError) as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    if args.format == "text":
        for k, v in rec["report"].items():
            print(f"{k}: {v}")
    else:
        print(_dump(rec))
    return EXIT_OK


def cmd_scan(args) -> int:
    from .family_scan import scan_quadratic, scan_quartic

    try:
        if args.family == "quadratic":
            results = scan_quadratic(args.smax, include_s2_plus_1=args.s2p1, jobs=args.jobs)
        else:
            results = scan_quartic(args.mmax, jobs=args.jobs)
    except ValueError as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    for r in results:
        d = r.to_dict(timing=not args.no_timing)
        d["status"] = "skipped" if "reason" in d else "verified"
        print(_dump(d))
    return EXIT_OK


def cmd_constants(args) -> int:
    from .family_scan import constants

    try:
        c = constants(args.P)
    except ValueError as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    print(_dump({"c1_truncated": repr(c.c1_truncated), "P": c.truncation_bound,
                 "beta": repr(c.beta), "tau": repr(c.tau)}))
    print(f"tau = {c.tau:.12f}", file=sys.stderr)
    return EXIT_OK


def cmd_census(args) -> int:
    from .family_scan import pell_census

    try:
        rec = pell_census(args.X)
    except (ValueError, OverflowError) as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    print(_dump(rec))
    return EXIT_OK


def cmd_verify(args) -> int:
    """Quick self-check: the two worked examples and the shipped fixtures."""
    from importlib import resources

    failures = 0
    checks = [("quadratic", 5, "E8"), ("quartic", 6, "E8xE8"), ("quartic", 20, "BarnesWall16")]
    for fam, p, want in checks:
        try:
            rec = construct_record(fam, p, timing=False)
            got = rec["report"]["classification"]
        except (FieldError, OrderError, TwistError) as exc:
            got = f"error: {exc}"
        ok = got == want
        failures += not ok
        print(f"{'ok  ' if ok else 'FAIL'} construct {fam} {p}: {got}")
    for name, want in [("e8_sqrt5.gram", "E8"), ("bw16_m20.gram", "BarnesWall16")]:
        path = resources.files("quatlattice") / "data" / name
        got = classify(read_gram(str(path))).classification
        ok = got == want
        failures += not ok
        print(f"{'ok  ' if ok else 'FAIL'} fixture {name}: {got}")
    return EXIT_OK if not failures else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quatlattice",
                                description="Lattices from maximal quaternion orders over totally real fields.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("construct", help="build and classify one lattice")
    c.add_argument("family", choices=["quadratic", "quartic"])
    c.add_argument("parameter", type=int, help="D for Q(sqrt D), m for the simplest quartic F_m")
    c.add_argument("--method", choices=["auto", "pell", "family"], default="auto",
                   help="twist search for quadratic fields")
    c.add_argument("--format", choices=["json", "text"], default="json")
    c.add_argument("--precision", type=int, default=None,
                   help=f"bits for the real embedding check (default ${PRECISION_ENV} or 128)")
    c.add_argument("--theta-bound", type=int, default=None)
    c.add_argument("--no-timing", action="store_true")
    c.add_argument("--gram-out", metavar="FILE", help="also write the Gram matrix in fixture format")
    c.set_defaults(func=cmd_construct)

    a = sub.add_parser("analyze", help="report on a Gram matrix file")
    a.add_argument("gram_file")
    a.add_argument("--format", choices=["json", "text"], default="json")
    a.add_argument("--theta-bound", type=int, default=None)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("scan", help="run a parameter family, one JSON line per parameter")
    s.add_argument("family", choices=["quadratic", "quartic"])
    s.add_argument("--smax", type=int, default=25)
    s.add_argument("--mmax", type=int, default=40)
    s.add_argument("--s2p1", action="store_true", help="also scan D = s^2 + 1")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--no-timing", action="store_true")
    s.set_defaults(func=cmd_scan)

    k = sub.add_parser("constants", help="density constants c1, beta, tau")
    k.add_argument("--P", type=int, default=100_000)
    k.set_defaults(func=cmd_constants)

    n = sub.add_parser("census", help="negative Pell census over admissible discriminants")
    n.add_argument("--X", type=int, default=100_000)
    n.set_defaults(func=cmd_census)

    v = sub.add_parser("verify", help="rebuild the worked examples and check the fixtures")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "precision", 0) is None:
        args.precision = default_precision()
    if getattr(args, "precision", DEFAULT_PRECISION_BITS) < 64:
        return _fail(EXIT_PRECONDITION, "precision must be at least 64 bits")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
