"""
Command-line interface.

Exit status: 0 when every bounded check passes (or the command carries no
verdict), 1 when any check fails, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction

from . import gridops, scaling, verifier
from .fieldkit import GALLERY, from_fourier, gallery, load_fourier_spec
from .gridops import DEFAULT_RADIUS_FACTOR, Grid
from .scalecalc import (ParseError, UnknownSymbolError, WeightAssignment,
                        as_rational, check_invariance, weight)
from .verifier import VerificationReport, reports_to_json, reports_to_table

__all__ = ["main", "run", "build_parser"]

EXPONENT_TOLERANCES = {"sup_vorticity": 1e-6, "sup_velocity": 1e-6, "energy": 1e-4}
BKM_REFINEMENT = 10
BKM_RELATIVE_TOL = 1e-3


class UsageError(Exception):
    pass


# -- argument types ------------------------------------------------------------

def _rational(text):
    try:
        return as_rational(text)
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _rational_list(text):
    return [_rational(part) for part in text.split(",") if part.strip()]


def _assignment(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), value.strip()


# -- output --------------------------------------------------------------------

def _reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "value", "measured", "bound", "limit", "verdict"])
    for r in sorted(reports, key=lambda r: r.check):
        for name, value in sorted(r.values.items()):
            bound = r.tolerances.get(name, {})
            kind, limit = next(iter(bound.items()), ("", ""))
            writer.writerow([r.check, name, format(value, ".12g"), kind,
                             format(limit, ".12g") if limit != "" else "", r.verdict])
    return buf.getvalue()


def _emit_reports(reports, fmt):
    if fmt == "json":
        return reports_to_json(reports) + "\n"
    if fmt == "csv":
        return _reports_to_csv(reports)
    return reports_to_table(reports) + "\n"


def _status(reports):
    return 1 if any(r.verdict == "fail" for r in reports) else 0


# -- field and grid resolution -------------------------------------------------

def _resolve_field(args):
    params = {}
    for name, value in getattr(args, "param", None) or []:
        if name == "terms":
            params[name] = int(value)
        elif name == "beta":
            params[name] = tuple(as_rational(v) for v in value.split(","))
        else:
            params[name] = float(value)
    if args.field == "fourier":
        if not args.fourier_spec:
            raise UsageError("field 'fourier' needs --fourier-spec PATH")
        field = from_fourier(load_fourier_spec(args.fourier_spec), project=not args.no_project)
        return field.with_params(**params) if params else field
    if args.field not in GALLERY:
        raise UsageError(f"unknown field {args.field!r}; run gallery-list")
    return gallery(args.field, **params)


def _resolve_grid(field, spec):
    if spec is None:
        spec = "periodic:32" if field.decay == "periodic" else "truncated:64"
    parts = spec.split(":")
    if parts[0] not in ("periodic", "truncated") or len(parts) not in (2, 3):
        raise UsageError(f"grid spec must be periodic:N[:EXTENT] or truncated:N[:R], got {spec!r}")
    try:
        n = int(parts[1])
        extent = float(parts[2]) if len(parts) == 3 else None
    except ValueError:
        raise UsageError(f"malformed grid spec {spec!r}") from None
    if parts[0] == "periodic":
        if field.periods is None:
            raise UsageError(f"{field.name} is not periodic; use a truncated grid")
        extents = field.periods if extent is None else (extent,) * field.dim
        return Grid.periodic(extents, n, field.dim)
    radius = DEFAULT_RADIUS_FACTOR * field.length_scale if extent is None else extent
    return Grid.truncated(radius, n, field.dim)


# -- subcommands ---------------------------------------------------------------

def _weight_assignment(args):
    overrides = {name: as_rational(value) for name, value in args.fix or []}
    return WeightAssignment(args.alpha_x, args.alpha_t, args.alpha_rho, overrides)


def cmd_weights(args):
    w = weight(args.expression, _weight_assignment(args))
    if args.format == "json":
        return json.dumps({"expression": args.expression, "weight": w.to_json()}) + "\n", 0
    if args.format == "csv":
        return f"expression,weight\n\"{args.expression}\",{w}\n", 0
    return f"{w}\n", 0


def cmd_invariance(args):
    report = check_invariance(args.terms, _weight_assignment(args))
    if args.format == "json":
        text = json.dumps(report.to_json(), indent=2) + "\n"
    else:
        rows = [(str(t), str(w)) for t, w in zip(report.terms, report.term_weights)]
        if args.format == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["term", "weight"])
            writer.writerows(rows)
            text = buf.getvalue()
        else:
            width = max(len(r[0]) for r in rows)
            lines = [f"{t.ljust(width)}  {w}" for t, w in rows]
            verdict = f"invariant, common weight {report.common_weight}" if report.invariant \
                else "not invariant"
            text = "\n".join(lines + [verdict]) + "\n"
    return text, 0 if report.invariant else 1


def cmd_verify(args):
    field = _resolve_field(args)
    grid = _resolve_grid(field, args.grid)
    reports = verifier.run_suite(field, grid, args.t, args.nu)
    return _emit_reports(reports, args.format), _status(reports)


def _exponent_rows(records, exact):
    show = str if exact else (lambda v: repr(float(v)))
    return [[show(v) for v in (r.r, r.omega_exp, r.u_exp, r.E_exp)] + [str(r.blowup_safe).lower()]
            for r in records]


def _emit_records(records, fmt, exact=False):
    if fmt == "json":
        return json.dumps([r.to_json() for r in records], indent=2) + "\n"
    header = ["r", "omega_exp", "u_exp", "E_exp", "blowup_safe"]
    rows = _exponent_rows(records, exact)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths))
                     for row in [header] + rows) + "\n"


def cmd_exponents(args):
    record = scaling.predict_exponents(args.beta_x, args.beta_t)
    return _emit_records([record], args.format, exact=True), 0


def cmd_table1(args):
    if args.format == "csv":
        return scaling.table1_csv(), 0
    if args.format == "json":
        return scaling.table1_json() + "\n", 0
    return _emit_records(scaling.table1(), "table"), 0


def cmd_measure(args):
    field = _resolve_field(args)
    law = scaling.ScalingLaw(args.alpha_x, args.alpha_t)
    m = scaling.measure_exponent(field, law, args.norm, args.k, n=args.n, t=args.t)
    values = {"slope": m.slope, "fit_residual": m.fit_residual}
    values.update({f"norm_at_k={k:g}": v for k, v in zip(m.ks, m.values)})
    tolerances = {}
    if m.predicted is not None:
        values["predicted"] = float(m.predicted)
        values["deviation"] = m.deviation
        tolerances = {"deviation": {"max": EXPONENT_TOLERANCES[args.norm]}}
    report = VerificationReport(f"exponent-{args.norm}", values, tolerances,
                                "norm-scaling exponent of a self-similar family")
    return _emit_reports([report], args.format), _status([report])


def cmd_bkm(args):
    field = _resolve_field(args)
    grid = _resolve_grid(field, args.grid)
    t1 = args.t1 if args.t1 is not None else 10 * field.params.T
    value = gridops.bkm_integral(field, grid, args.t0, t1, args.steps)
    values = {"bkm_integral": value, "t0": args.t0, "t1": t1}
    tolerances = {}
    if args.refine_check:
        refined = gridops.bkm_integral(field, grid, args.t0, t1, BKM_REFINEMENT * args.steps)
        values["refined_integral"] = refined
        values["relative_difference"] = abs(value - refined) / abs(refined) if refined else 0.0
        tolerances = {"relative_difference": {"max": BKM_RELATIVE_TOL}}
    report = VerificationReport("bkm-integral", values, tolerances,
                                "time integral of the vorticity supremum")
    return _emit_reports([report], args.format), _status([report])


def cmd_gallery_list(args):
    names = list(GALLERY)
    fields = [gallery(n) for n in names]
    if args.format == "json":
        return json.dumps([{"name": f.name, "dim": f.dim, "decay": f.decay,
                            "description": f.description} for f in fields], indent=2) + "\n", 0
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "dim", "decay", "description"])
        writer.writerows([f.name, f.dim, f.decay, f.description] for f in fields)
        return buf.getvalue(), 0
    width = max(map(len, names))
    return "\n".join(f"{f.name.ljust(width)}  {f.dim}-D {f.decay:<9} {f.description}"
                     for f in fields) + "\n", 0


# -- parser --------------------------------------------------------------------

def _add_output(p, default="table"):
    p.add_argument("--format", choices=("table", "json", "csv"), default=default)
    p.add_argument("--out", help="write the report here instead of stdout")


def _add_alphas(p, required=False, symbolic=True):
    note = " (omit to keep symbolic)" if symbolic else ""
    p.add_argument("--alpha-x", type=_rational, required=required,
                   default=None if symbolic else Fraction(1), help="space exponent, p/q" + note)
    p.add_argument("--alpha-t", type=_rational, required=required,
                   default=None if symbolic else Fraction(2), help="time exponent, p/q" + note)


def _add_field(p):
    p.add_argument("field", help="gallery name (see gallery-list) or 'fourier'")
    p.add_argument("--param", type=_assignment, action="append", metavar="NAME=VALUE",
                   help="override a parameter: U, L, L1..L3, T, nu, h, terms, beta=bx,bt")
    p.add_argument("--fourier-spec", metavar="PATH", help="JSON mode list for field 'fourier'")
    p.add_argument("--no-project", action="store_true",
                   help="keep longitudinal Fourier components")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsverify",
        description="Scaling-weight calculus and numerical checks for incompressible "
                    "Navier-Stokes fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="isobaric weight of an expression",
                       description="Compute the isobaric weight of EXPRESSION under the scaling "
                                   "group x -> k^ax x, t -> k^at t, u -> k^(ax-at) u.")
    p.add_argument("expression")
    _add_alphas(p)
    p.add_argument("--alpha-rho", type=_rational, default=None, help="density exponent, p/q")
    p.add_argument("--fix", type=_assignment, action="append", metavar="SYMBOL=WEIGHT",
                   help="override one symbol weight, e.g. nu=0 for a fixed viscosity")
    _add_output(p)
    p.set_defaults(handler=cmd_weights)

    p = sub.add_parser("invariance", help="scaling invariance of an equation",
                       description="Decide whether the equation sum(TERMS) = 0 is invariant "
                                   "under the scaling group: every term isobaric with one "
                                   "common weight.  Exit 1 if not.")
    p.add_argument("terms", nargs="+")
    _add_alphas(p)
    p.add_argument("--alpha-rho", type=_rational, default=None)
    p.add_argument("--fix", type=_assignment, action="append", metavar="SYMBOL=WEIGHT")
    _add_output(p)
    p.set_defaults(handler=cmd_invariance)

    p = sub.add_parser("verify", help="run the field verification suite",
                       description="Sample FIELD on a grid and run the verification suite. The "
                                   "momentum check recovers the pressure from a Poisson solve.")
    _add_field(p)
    p.add_argument("--grid", help="periodic:N[:EXTENT] or truncated:N[:R] "
                                  "(default periodic:32 or truncated:64 with R = 6L)")
    p.add_argument("--t", type=float, default=0.0, help="sample time")
    p.add_argument("--nu", type=float, default=None, help="viscosity (default: field's own)")
    _add_output(p, "json")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("exponents", help="predicted norm-scaling exponents",
                       description="Exact exponents 2r-3 (sup vorticity), 2(r-1) (sup velocity) "
                                   "and 4r-1 (energy) for r = bx/bt, and whether r > 3/2.")
    p.add_argument("--beta-x", type=_rational, required=True)
    p.add_argument("--beta-t", type=_rational, default=Fraction(1))
    _add_output(p)
    p.set_defaults(handler=cmd_exponents)

    p = sub.add_parser("table1", help="exponent table for ten weight ratios",
                       description="Exponent table for r in {-2, -1, -1/2, 0, 1/2, 1, 6/5, 3/2, "
                                   "2, 3}, columns r, omega_exp, u_exp, E_exp.")
    _add_output(p)
    p.set_defaults(handler=cmd_table1)

    p = sub.add_parser("measure", help="measure a norm-scaling exponent",
                       description="Fit the log-log slope of a norm across the rescaled family "
                                   "of FIELD and compare it with the predicted exponent when the "
                                   "field carries weights (bx, bt).")
    _add_field(p)
    _add_alphas(p, symbolic=False)
    p.add_argument("--norm", choices=scaling.NORM_KINDS, default="sup_vorticity")
    p.add_argument("--k", type=_rational_list, default=[Fraction(1, 2), 1, 2, 4],
                   help="comma-separated scale factors (default 1/2,1,2,4)")
    p.add_argument("--n", type=int, default=32, help="points per axis of each cell")
    p.add_argument("--t", type=float, default=0.0)
    _add_output(p)
    p.set_defaults(handler=cmd_measure)

    p = sub.add_parser("bkm", help="vorticity-supremum time integral",
                       description="Composite-trapezoid integral of sup|omega| over [T0, T1] "
                                   "(default [0, 10T]).")
    _add_field(p)
    p.add_argument("--grid")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=None)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--refine-check", action="store_true",
                   help=f"compare with a {BKM_REFINEMENT}x refined quadrature")
    _add_output(p)
    p.set_defaults(handler=cmd_bkm)

    p = sub.add_parser("gallery-list", help="list the named example fields")
    _add_output(p)
    p.set_defaults(handler=cmd_gallery_list)
    return parser


_OPTION_LIKE = re.compile(r"--?[A-Za-z][\w-]*(=.*)?|-h|--")


def _shield_expressions(argv):
    """Keep expressions such as ``-nu*d(u,x)`` or ``-1/2`` from being read as options.

    A leading space makes argparse treat the token as a value; the
    expression and rational parsers ignore it.
    """
    return [f" {a}" if a.startswith("-") and not _OPTION_LIKE.fullmatch(a) else a for a in argv]


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = _shield_expressions(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, status = args.handler(args)
    except (UsageError, ValueError, KeyError, TypeError, ParseError, UnknownSymbolError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"nsverify {args.command}: error: {message}", file=stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return status


def main(argv=None):
    sys.exit(run(argv))
