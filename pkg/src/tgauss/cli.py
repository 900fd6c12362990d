"""Command-line interface: ``tgauss {moments,density,classify,verify,convolve}``.

Exit codes: 0 success, 1 a verify check failed, 2 precondition violation,
3 numerical non-convergence.  Errors are reported as JSON on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .analysis import classify_regime, window
from .cfree import MarginalPair, cfree_clt, cfree_convolution, cfree_power
from .fock import DeformParams
from .laurent import ExactOverflowError
from .operators import c_operator, gaussian, vacuum_moment
from .scalar import Surd
from .spectra import (c_atom_location, c_atom_weight, c_has_atom, c_measure, closed_form_G,
                      closed_form_series, detect_atom, gaussian_atom_weight, gaussian_measure,
                      measure_moment, stieltjes_invert)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_PRECONDITION, EXIT_NONCONVERGENCE = 0, 1, 2, 3
DIGITS = 20


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialization

def _decimal(q: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = DIGITS
        return str(Decimal(q.numerator) / Decimal(q.denominator))


def encode(x):
    """JSON-ready form; rationals keep their exact value next to the decimal one."""
    if isinstance(x, Surd):
        if x.is_rational:
            return encode(x.a)
        with localcontext() as ctx:
            ctx.prec = DIGITS + 5
            val = (Decimal(x.a.numerator) / x.a.denominator
                   + Decimal(x.b.numerator) / x.b.denominator
                   * (Decimal(x.t.numerator) / x.t.denominator).sqrt())
            ctx.prec = DIGITS
            val = +val
        return {"decimal": str(val), "exact": str(x)}
    if isinstance(x, Fraction):
        return {"decimal": _decimal(x), "num": x.numerator, "den": x.denominator}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) + 0.0   # no "-0.0" in the output
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {k: encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    return x


def _cell(x) -> str:
    if isinstance(x, Surd):
        return str(x.a) if x.is_rational else str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x + 0.0)
    return str(x)


def emit(record: dict, rows_key: str | None, fmt: str, out) -> None:
    if fmt == "csv" and rows_key is not None:
        rows = record[rows_key]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if rows:
            header = list(rows[0].keys())
            writer.writerow(header)
            for r in rows:
                writer.writerow([_cell(r[h]) for h in header])
        out.write(buf.getvalue())
        return
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        flat = {k: v for k, v in record.items() if not isinstance(v, (list, dict))}
        writer.writerow(list(flat.keys()))
        writer.writerow([_cell(v) for v in flat.values()])
        out.write(buf.getvalue())
        return
    out.write(json.dumps(encode(record), indent=2) + "\n")


# ---------------------------------------------------------------------------
# configuration

def parse_t(text: str, precision: str):
    if precision == "exact":
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise PreconditionError(f"exact precision needs a rational t, got {text!r}") from None
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"cannot parse t = {text!r}") from None


def make_params(args) -> DeformParams:
    t = parse_t(args.t, args.precision)
    return DeformParams(t, args.n, args.L)


def _config(args) -> dict:
    return {"t": args.t, "n": args.n, "L": args.L, "precision": args.precision,
            "order": args.order, "seed": args.seed}


def _diff(values) -> float:
    fl = [float(v) for v in values]
    return max(fl) - min(fl)


# ---------------------------------------------------------------------------
# commands

def cmd_moments(args) -> tuple:
    p = make_params(args)
    kmax = args.order
    if args.target == "gaussian":
        op, kind, meas, n = gaussian(1, p), "s_t", gaussian_measure(p.t), 1
    else:
        op, kind, meas, n = c_operator(p), "c_t", c_measure(p.t, p.n), p.n
    series = closed_form_series(kind, p.t, n, kmax)
    rows = []
    for k in range(kmax + 1):
        mat = vacuum_moment(op, k)
        quad = measure_moment(meas, k)
        ser = series[k]
        rows.append({"k": k, "matrix_moment": mat, "measure_moment": quad, "series_moment": ser,
                     "max_abs_diff": _diff([mat, quad, ser])})
    atom = bool(meas.atoms)
    rec = {"command": "moments", "config": _config(args), "target": args.target,
           "atom": atom, "rows": rows}
    return rec, "rows"


def cmd_density(args) -> tuple:
    p = make_params(args)
    t = p.t
    if args.target == "gaussian":
        meas, kind, n = gaussian_measure(t), "s_t", 1
    else:
        meas, kind, n = c_measure(t, p.n), "c_t", p.n
    lo, hi = meas.support
    xs = np.linspace(lo, hi, args.grid + 2)[1:-1]
    G = lambda z: closed_form_G(kind, t, n, z)  # noqa: E731
    inv = stieltjes_invert(G, xs, args.epsilon)
    rows = []
    for x, f_inv in zip(xs, inv):
        f = meas.density(float(x))
        rows.append({"x": float(x), "closed_form_density": float(f),
                     "inverted_density": float(f_inv), "abs_diff": abs(float(f) - float(f_inv))})
    atoms = []
    for loc, weight in meas.atoms:
        est = detect_atom(G, float(loc), epsilon=args.epsilon)
        atoms.append({"location": loc, "weight": weight, "detected_weight": est.weight,
                      "detected": est.is_atom})
    if kind == "s_t":
        formula = gaussian_atom_weight(t)
        formula_loc = None
    else:
        formula = c_atom_weight(t, p.n)
        formula_loc = c_atom_location(t, p.n) if c_has_atom(t, p.n) else None
    rec = {"command": "density", "config": _config(args), "target": args.target,
           "epsilon": args.epsilon, "atom_weight_formula": formula, "atom_location_formula": formula_loc,
           "atoms": atoms, "rows": rows}
    return rec, "rows"


def cmd_classify(args) -> tuple:
    p = make_params(args)
    if p.n < 2:
        raise PreconditionError("classification needs n >= 2")
    v = classify_regime(p.t, p.n)
    lo, hi = window(p.n)
    rec = {"command": "classify", "config": _config(args), "regime": v.regime.value,
           "boundary_distance": v.boundary_distance, "on_boundary": v.on_boundary,
           "interval": [lo, hi]}
    return rec, None


def cmd_verify(args) -> tuple:
    p = make_params(args)
    checks = run_suite(args.suite, p, args.seed)
    rows = [{"suite": c.suite, "check": c.name, "passed": c.passed,
             "discrepancy": c.discrepancy, "tolerance": c.tolerance} for c in checks]
    rec = {"command": "verify", "config": _config(args), "suite": args.suite,
           "passed": all(c.passed for c in checks), "n_checks": len(checks),
           "n_failed": sum(not c.passed for c in checks), "rows": rows}
    return rec, "rows"


def _read_number(x, precision: str):
    if precision == "exact":
        if isinstance(x, float):
            return Fraction(str(x))
        return Fraction(x)
    return float(Fraction(x)) if isinstance(x, str) else float(x)


def load_pairs(path: str, precision: str) -> list:
    try:
        if path == "-":
            data = json.load(sys.stdin)
        else:
            with open(path) as fh:
                data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read moment pairs: {exc}") from None
    if not isinstance(data, list) or not data:
        raise PreconditionError("input must be a non-empty JSON array of moment-pair records")
    pairs = []
    for rec in data:
        try:
            phi = [_read_number(v, precision) for v in rec["phi_moments"]]
            psi = [_read_number(v, precision) for v in rec["psi_moments"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"bad moment-pair record: {exc}") from None
        pairs.append(MarginalPair(phi, psi, label=str(rec.get("label", ""))))
    return pairs


def cmd_convolve(args) -> tuple:
    pairs = load_pairs(args.input, args.precision)
    order = args.order
    for pr in pairs:
        if pr.order < order:
            raise PreconditionError(f"pair {pr.label!r} has moments only up to {pr.order} < order {order}")
    first = (pairs[0].phi_moments, pairs[0].psi_moments)
    rec = {"command": "convolve", "config": _config(args), "labels": [pr.label for pr in pairs]}
    if args.clt is not None:
        mu = cfree_clt(first, args.clt, order)
        rec.update(mode="clt", N=args.clt, mu_moments=mu.moments)
    elif args.power is not None:
        mu, nu = cfree_power(first, args.power, order)
        rec.update(mode="power", N=args.power, mu_moments=mu.moments, nu_moments=nu.moments)
    else:
        if len(pairs) != 2:
            raise PreconditionError("pairwise convolution needs exactly two records (or --power/--clt)")
        second = (pairs[1].phi_moments, pairs[1].psi_moments)
        mu, nu = cfree_convolution(first, second, order)
        rec.update(mode="pair", mu_moments=mu.moments, nu_moments=nu.moments)
    rows = [{"k": k, "mu_moment": m, **({"nu_moment": rec["nu_moments"][k]} if "nu_moments" in rec else {})}
            for k, m in enumerate(rec["mu_moments"])]
    rec["rows"] = rows
    return rec, "rows"


COMMANDS = {"moments": cmd_moments, "density": cmd_density, "classify": cmd_classify,
            "verify": cmd_verify, "convolve": cmd_convolve}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--t", default="1/2", help="deformation parameter (rational for exact mode)")
    common.add_argument("--n", type=int, default=1, help="number of generators")
    common.add_argument("--L", type=int, default=8, help="Fock-space truncation level")
    common.add_argument("--precision", choices=("exact", "float"), default="exact")
    common.add_argument("--order", type=int, default=8, help="largest moment / series order")
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--epsilon", type=float, default=1e-6, help="Stieltjes inversion offset")
    common.add_argument("--grid", type=int, default=41, help="number of density sample points")

    parser = argparse.ArgumentParser(prog="tgauss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("moments", "density"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--target", choices=("gaussian", "c"), default="gaussian")
    sub.add_parser("classify", parents=[common])
    sp = sub.add_parser("verify", parents=[common])
    sp.add_argument("--suite", choices=("all",) + SUITES, default="all")
    sp = sub.add_parser("convolve", parents=[common])
    sp.add_argument("--input", default="-", help="JSON file of moment pairs ('-' for stdin)")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--power", type=int, help="N-fold c-free self-convolution of the first pair")
    mode.add_argument("--clt", type=int, help="c-free CLT at N for the first pair")
    return parser


def _error(exc: Exception, code: int, out) -> int:
    out.write(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc),
                                    "exit_code": code}}, indent=2) + "\n")
    return code


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        record, rows_key = COMMANDS[args.command](args)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        if isinstance(exc, (ZeroDivisionError, ExactOverflowError)):
            return _error(exc, EXIT_PRECONDITION, out)
        return _error(exc, EXIT_NONCONVERGENCE, out)
    except (ValueError, TypeError, KeyError) as exc:
        return _error(exc, EXIT_PRECONDITION, out)
    emit(record, rows_key, args.output, out)
    if args.command == "verify" and not record["passed"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
