"""Command-line front end: evaluate, check, classify, export grids.

Exit codes are a stable contract: 0 = pass, 1 = property failure (a check
that ran and refuted the property, or an I/O failure), 2 = usage, parse or
validation error. Machine-readable lines (``RESULT ...``) carry no
timestamps and use shortest round-trip float formatting, so identical
invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import verify
from .algebra import (AggregationFunction, aggregation_from_combiner,
                      catalog_describe, catalog_lookup, unit_function_from_expr)
from .construct import GeneratorTriple, from_triple
from .errors import QhaggError
from .numerics import make_grid
from .verify import PhiSpec, PsiSpec

# ----------------------------------------------------------- function specs


def _parse_triple_item(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise QhaggError(f"triple items look like f=EXPR, got {item!r}")
    key, text = item.split("=", 1)
    if key not in ("f", "g", "h") or not text:
        raise QhaggError(f"triple items are f=..., g=..., h=..., got {item!r}")
    return key, text


def spec_from_args(args) -> dict:
    """Normalize CLI flags into a function-spec dictionary.

    The same dictionaries, JSON-encoded, form the spec-file format:
    one object with a ``kind`` of catalog, triple, flat, boundary or
    expr2d (see README for the field list of each kind).
    """
    chosen = [name for name, flag in (("--fn", args.fn), ("--triple", args.triple),
                                      ("--expr2d", args.expr2d),
                                      ("--spec-file", args.spec_file)) if flag]
    if len(chosen) != 1:
        raise QhaggError(
            f"exactly one of --fn / --triple / --expr2d / --spec-file is required"
            f"{', got ' + ', '.join(chosen) if chosen else ''}")

    if args.spec_file:
        try:
            with open(args.spec_file, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise QhaggError(f"cannot read spec file {args.spec_file}: {exc}")
        if not isinstance(spec, dict) or "kind" not in spec:
            raise QhaggError("spec file must be a JSON object with a 'kind' field")
        return spec

    if args.fn:
        params = {}
        for key in ("alpha", "beta"):
            val = getattr(args, key)
            if val is not None:
                params[key] = val
        for key in ("g", "h"):
            val = getattr(args, key)
            if val is not None:
                params[key] = val
        return {"kind": "catalog", "name": args.fn, "params": params}

    if args.triple:
        items = dict(_parse_triple_item(item) for item in args.triple)
        missing = [k for k in ("f", "g", "h") if k not in items]
        if missing:
            raise QhaggError(f"--triple is missing {missing}")
        return {"kind": "triple", **items}

    u = args.ux if args.ux is not None else "x"
    v = args.vy if args.vy is not None else "x"
    return {"kind": "expr2d", "combiner": args.expr2d, "u": u, "v": v}


def build_aggregation(spec: dict, *, validate: bool = True) -> AggregationFunction:
    """Materialize a function-spec dictionary.

    ``validate=False`` builds raw formulas without eager construction
    checks; the check command uses it so that invalid inputs are reported
    as check failures (exit 1) rather than rejected up front.
    """
    kind = spec.get("kind")
    if kind == "catalog":
        return catalog_lookup(spec.get("name", ""), spec.get("params") or {})
    if kind == "triple":
        t = GeneratorTriple(
            f=unit_function_from_expr(spec["f"], continuous_bijection=True),
            g=unit_function_from_expr(spec["g"], increasing=True),
            h=unit_function_from_expr(spec["h"], increasing=True),
        )
        return from_triple(t, validate=validate)
    if kind == "flat":
        return catalog_lookup("flat", {"alpha": spec.get("alpha"),
                                       "beta": spec.get("beta")})
    if kind == "boundary":
        return catalog_lookup("boundary_only", {"g": spec.get("g", "x"),
                                                "h": spec.get("h", "x")})
    if kind == "expr2d":
        u = unit_function_from_expr(spec.get("u", "x"))
        v = unit_function_from_expr(spec.get("v", "x"))
        return aggregation_from_combiner(spec["combiner"], u, v, validate=validate)
    raise QhaggError(f"unknown function-spec kind {kind!r}")


def parse_psi(text: str) -> PsiSpec:
    """Flag grammar: ``power:c=<num> | step0 | step1``."""
    if text == "step0":
        return PsiSpec.step_at_zero()
    if text == "step1":
        return PsiSpec.step_at_one()
    if text.startswith("power:c="):
        try:
            return PsiSpec.power(float(text[len("power:c="):]))
        except ValueError:
            pass
    raise QhaggError(f"psi must be 'power:c=<num>', 'step0' or 'step1', got {text!r}")


def parse_phi(text: str, b_flag: str | None) -> PhiSpec:
    if b_flag is not None and b_flag != "inf":
        raise QhaggError(f"--phi-b accepts only 'inf', got {b_flag!r}")
    if text.strip() == "x" and b_flag is None:
        return PhiSpec.identity()
    return PhiSpec.from_expr(text, b=float("inf") if b_flag else None)


# ------------------------------------------------------------------ output


def _fit_label(section, grid) -> str:
    pts = grid.points
    mask = (pts >= 0.1) & (pts <= 0.9)
    xs = pts[mask]
    ys = np.asarray(section.evaluator(xs), dtype=float)
    if np.all(ys > 0.0):
        try:
            c, resid = verify.fit_power_exponent(xs, ys)
        except QhaggError:
            return "(sampled)"
        if resid <= 1e-6 and c > 0:
            return "x (fitted)" if abs(c - 1.0) < 1e-9 else f"x^{c:g} (fitted)"
    return "(sampled)"


def render_classification(report, grid) -> str:
    if report.verdict == verify.CLASS1:
        return f"Class1 delta={_fit_label(report.delta, grid)}"
    if report.verdict == verify.CLASS2:
        return f"Class2 alpha={report.alpha:g} beta={report.beta:g}"
    if report.verdict == verify.CLASS3:
        return (f"Class3 g={_fit_label(report.g, grid)} "
                f"h={_fit_label(report.h, grid)}")
    lam, x, y, res = report.witness
    return (f"NotQuasiHomogeneous witness=(lam={lam!r}, x={x!r}, y={y!r}, "
            f"residual={res!r})")


def _result_line(passed: bool, residual: float) -> str:
    return f"RESULT {'pass' if passed else 'fail'} max_residual={residual!r}"


# ---------------------------------------------------------------- commands


def cmd_eval(args) -> int:
    A = build_aggregation(spec_from_args(args))
    if not (0.0 <= args.x <= 1.0) or not (0.0 <= args.y <= 1.0):
        raise QhaggError(f"arguments must lie in [0, 1], got ({args.x}, {args.y})")
    print(f"{A(args.x, args.y):.17g}")
    return 0


def cmd_check(args) -> int:
    A = build_aggregation(spec_from_args(args), validate=False)
    grid = make_grid(args.grid)

    if args.mode == "agg":
        tol = 1e-9 if args.tol is None else args.tol
        report = verify.check_aggregation(A, grid=grid, tol=tol)
        print(report)
        print(_result_line(report.passed, report.max_violation))
        return 0 if report.passed else 1

    if args.mode == "qh":
        if args.psi is None:
            raise QhaggError("--mode qh requires --psi")
        psi = parse_psi(args.psi)
        phi = parse_phi(args.phi, args.phi_b)
        report = verify.check_quasi_homogeneity(A, phi, psi, grid=grid, tol=args.tol)
        print(report)
        print(_result_line(report.passed, report.max_residual))
        return 0 if report.passed else 1

    tol = 1e-6 if args.tol is None else args.tol
    report = verify.classify(A, grid=grid, tol=tol)
    print(render_classification(report, grid))
    if report.reason:
        print(f"reason: {report.reason}")
    for key in sorted(report.diagnostics):
        print(f"diagnostic {key}: {report.diagnostics[key]!r}")
    print(_result_line(report.is_quasi_homogeneous, report.max_residual))
    return 0 if report.is_quasi_homogeneous else 1


def cmd_grid(args) -> int:
    A = build_aggregation(spec_from_args(args))
    grid = make_grid(args.n)
    p = grid.points
    V = np.asarray(A.evaluator(p[:, None], p[None, :]), dtype=float)
    lines = ["x,y,value"]
    for i in range(len(p)):
        for j in range(len(p)):
            lines.append(f"{float(p[i])!r},{float(p[j])!r},{float(V[i, j])!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write {args.out}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


def cmd_catalog(args) -> int:
    for name, desc, keys in catalog_describe():
        params = f" (params: {', '.join(keys)})" if keys else ""
        print(f"{name}: {desc}{params}")
    return 0


def load_grid_csv(path: str) -> AggregationFunction:
    """Re-ingest a dumped grid as a tabulated aggregation function.

    Defined exactly at the dumped sample points; shortest round-trip float
    formatting makes the tabulated values agree with the source bit for
    bit.
    """
    table: dict[tuple[float, float], float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "x,y,value":
            raise QhaggError(f"unexpected CSV header {header!r} in {path}")
        for line in fh:
            xs, ys, vs = line.strip().split(",")
            table[(float(xs), float(ys))] = float(vs)

    def lookup(x, y):
        return table[(float(x), float(y))]

    return AggregationFunction(evaluator=np.vectorize(lookup, otypes=[float]),
                               provenance="tabulated", name=f"csv:{path}")


# ------------------------------------------------------------------ parser


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fn", help="catalog entry name (see the catalog command)")
    p.add_argument("--alpha", type=float, help="flat-class boundary constant A(0, y)")
    p.add_argument("--beta", type=float, help="flat-class boundary constant A(x, 0)")
    p.add_argument("--g", help="boundary-class section A(1, y) as an expression")
    p.add_argument("--h", help="boundary-class section A(x, 1) as an expression")
    p.add_argument("--triple", nargs=3, metavar=("f=EXPR", "g=EXPR", "h=EXPR"),
                   help="generator triple, e.g. --triple f=x g=x h=2*x/(1+x)")
    p.add_argument("--expr2d", metavar="COMBINER",
                   help="combine two unit expressions: min, max, product, mean, bounded_sum")
    p.add_argument("--ux", help="expression u(x) for --expr2d (default x)")
    p.add_argument("--vy", help="expression v(y) for --expr2d (default x)")
    p.add_argument("--spec-file", help="JSON function-spec file (see README)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhagg",
        description="Construct, verify and classify quasi-homogeneous "
                    "aggregation functions on the unit square.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate A(x, y)")
    _add_spec_flags(p_eval)
    p_eval.add_argument("--x", type=float, required=True)
    p_eval.add_argument("--y", type=float, required=True)
    p_eval.set_defaults(func=cmd_eval)

    p_check = sub.add_parser("check", help="run a property check")
    _add_spec_flags(p_check)
    p_check.add_argument("--mode", choices=("agg", "qh", "classify"), required=True)
    p_check.add_argument("--psi", help="scaling function: power:c=<num> | step0 | step1")
    p_check.add_argument("--phi", default="x",
                         help="scaling bijection as an expression (default x)")
    p_check.add_argument("--phi-b", dest="phi_b", default=None,
                         help="'inf' to read the phi expression on [0,1) with phi(1)=inf")
    p_check.add_argument("--grid", type=int, default=100, metavar="N",
                         help="grid resolution (N+1 points per axis, default 100)")
    p_check.add_argument("--tol", type=float, default=None,
                         help="tolerance (default 1e-9; 1e-6 for classify or "
                              "bisection-backed phi)")
    p_check.set_defaults(func=cmd_check)

    p_grid = sub.add_parser("grid", help="dump A on a grid as CSV")
    _add_spec_flags(p_grid)
    p_grid.add_argument("--n", type=int, default=100,
                        help="grid resolution (default 100)")
    p_grid.add_argument("--out", help="output path (default stdout)")
    p_grid.set_defaults(func=cmd_grid)

    p_cat = sub.add_parser("catalog", help="list catalog entries")
    p_cat.set_defaults(func=cmd_catalog)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QhaggError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
