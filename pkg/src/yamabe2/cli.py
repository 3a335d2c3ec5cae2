"""Command-line front end.

Every subcommand writes one artifact (stdout or ``--out``) as JSON or CSV.
JSON documents carry the quantity name, value, method, tolerance
configuration, an anchor string naming the result being reproduced, and the
seed.  Numbers are written with 12 significant digits.

Exit codes: 0 success, 2 invalid input, 3 accuracy failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .checks import run_invariant_suite
from .constants import BoundReport, ah_sandwich, dim_data, product_constants, sphere_data
from .errors import AccuracyError, ConfigurationError, ValidationError, YamabeError
from .experiments import (
    SweepResult,
    default_t_grid,
    paper_tables,
    sandwich_sweep,
    strict_upper_check,
    y2n_limit_sweep,
)
from .groundstate import GNConfig, closed_form_alpha_n1, shoot_ground_state
from .periodic import PROFILE_GRID, first_N_yamabe, nodal_solutions, second_N_yamabe
from .spectra import ProductSpace, conformal_laplacian_spectrum, round_sphere

__all__ = ["run", "main", "build_parser"]

EXIT_OK, EXIT_VALIDATION, EXIT_ACCURACY, EXIT_USAGE = 0, 2, 3, 64
SIG_DIGITS = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _round(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v) for v in obj]
    return obj


def _t_grid(text):
    try:
        lo, hi, pts = text.split(":")
        return default_t_grid(float(lo), float(hi), int(pts))
    except (ValueError, ValidationError) as exc:
        raise argparse.ArgumentTypeError(f"--t-grid expects min:max:points with 0 < min < max, got {text!r} ({exc})")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--tol-ode", type=float, default=1e-12, help="ODE relative tolerance")
    common.add_argument("--tol-quad", type=float, default=1e-3,
                        help="radial quadrature step of the ground-state integrals")
    common.add_argument("--tol-bisect", type=float, default=1e-12,
                        help="bisection width on the ground-state initial value")
    common.add_argument("--grid", type=int, default=PROFILE_GRID, help="profile grid size")
    common.add_argument("--t-grid", type=_t_grid, default=None, metavar="MIN:MAX:POINTS")
    common.add_argument("--use-paper-alpha", action=argparse.BooleanOptionalAction, default=True,
                        help="use published alpha values in tables (default) or the solver's")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="yamabe2", description="Second Yamabe constants of products: constants, bounds, solvers.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("constants", parents=[common], help="a_k, p_k (one argument) or A_{m,n}, B_{m,n} (two)")
    p.add_argument("dims", type=int, nargs="+")
    p = sub.add_parser("sphere-yamabe", parents=[common], help="volume, scalar curvature and Y of S^d")
    p.add_argument("d", type=int)
    p = sub.add_parser("ah-bounds", parents=[common], help="sandwich bounds on Y^2 from Y")
    p.add_argument("k", type=int)
    p.add_argument("Y", type=float)
    p = sub.add_parser("gn", parents=[common], help="alpha_{m,n} from the radial ground state")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--profile", action="store_true")
    p = sub.add_parser("gn-closed", parents=[common], help="alpha_{m,1} in closed form")
    p.add_argument("m", type=int)
    p = sub.add_parser("spectrum", parents=[common], help="conformal Laplacian spectrum of S^m x S^n")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("t", type=float)
    p.add_argument("count", type=int)
    for name, helptext in (("nodal", "sign-changing periodic solutions"),
                           ("first-n", "first N-invariant on a circle"),
                           ("second-n", "second N-invariant on a circle")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("ell", type=float, help="circumference")
        p.add_argument("s", type=float)
        p.add_argument("a", type=float)
        p.add_argument("p", type=float)
        p.add_argument("--vol-M", type=float, default=1.0)
        p.add_argument("--max-pairs", type=int, default=8)
        p.add_argument("--profile", action="store_true")
    p = sub.add_parser("sweep-sandwich", parents=[common], help="both envelopes on S^(m-1) x S^1")
    p.add_argument("m", type=int)
    p = sub.add_parser("sweep-limit", parents=[common], help="second N-invariant of S^d x S^1 against its limit")
    p.add_argument("d", type=int, nargs="?", default=2)
    p.add_argument("--solver-alpha", action="store_true", help="take alpha_{d,1} from the shooting solver")
    p = sub.add_parser("strict-upper", parents=[common], help="second N-invariant against the upper sandwich bound")
    p.add_argument("m", type=int)
    sub.add_parser("tables", parents=[common], help="closed-form bound tables")
    sub.add_parser("check", parents=[common], help="run the invariant suite")
    return parser


def _tolerances(args):
    return {"ode": args.tol_ode, "quad_step": args.tol_quad, "bisect": args.tol_bisect, "grid": args.grid}


def _gn_config(args):
    return GNConfig(ode_tol=args.tol_ode, bisect_tol=args.tol_bisect, quad_h=args.tol_quad)


def _doc(args, quantity, value, method, anchor, result):
    return {
        "quantity": quantity,
        "value": value,
        "method": method,
        "tolerances": _tolerances(args),
        "anchor": anchor,
        "seed": args.seed,
        "version": __version__,
        "result": result,
    }


def _cmd_constants(args):
    if len(args.dims) == 1:
        d = dim_data(args.dims[0])
        return _doc(args, f"a_{d.k}, p_{d.k}", {"a": d.a, "p": d.p}, "closed form",
                    "conformal Laplacian coefficient and critical exponent", {"k": d.k, "a": d.a, "p": d.p})
    if len(args.dims) == 2:
        c = product_constants(*args.dims)
        return _doc(args, f"A_{c.m},{c.n}, B_{c.m},{c.n}", {"A": c.A, "B": c.B}, "closed form",
                    "product-dimension constants", {"m": c.m, "n": c.n, "A": c.A, "B": c.B})
    raise UsageError("constants takes k or m n")


def _cmd_sphere(args):
    d = sphere_data(args.d)
    res = {"d": d.d, "volume": d.volume, "scalar": d.scalar, "yamabe": d.yamabe}
    return _doc(args, f"Y(S^{d.d})", d.yamabe, "exact sphere volume", "round sphere Yamabe constant", res)


def _cmd_ah(args):
    lo, hi = ah_sandwich(args.k, args.Y)
    return _doc(args, f"Y2 bounds (k={args.k})", {"lower": lo, "upper": hi}, "closed form",
                "sandwich bound 2^(2/k) Y <= Y2 <= (Y^(k/2) + Y(S^k)^(k/2))^(2/k)",
                {"k": args.k, "Y": args.Y, "lower": lo, "upper": hi})


def _cmd_gn(args):
    gs = shoot_ground_state(args.m, args.n, _gn_config(args))
    return _doc(args, f"alpha_{args.m},{args.n}", gs.alpha, "radial shooting, bisection on u(0)",
                "Gagliardo-Nirenberg constant of the product dimension", gs.to_dict(include_profile=args.profile))


def _cmd_gn_closed(args):
    a = closed_form_alpha_n1(args.m)
    return _doc(args, f"alpha_{args.m},1", a, "sech profile, Beta-function integrals",
                "one-dimensional Gagliardo-Nirenberg constant", {"m": args.m, "alpha": a})


def _cmd_spectrum(args):
    P = ProductSpace(round_sphere(args.m), round_sphere(args.n), args.t)
    entries = conformal_laplacian_spectrum(P, args.count)
    rows = [{"value": e.value, "multiplicity": e.multiplicity, "i": e.labels[0], "j": e.labels[1]} for e in entries]
    return _doc(args, f"spec L(S^{args.m} x S^{args.n}, t={args.t})", [r["value"] for r in rows],
                "tensor-product enumeration", "conformal Laplacian of a product of round spheres",
                {"k": P.k, "t": args.t, "entries": rows})


def _solution_dict(sol, args):
    return sol.to_dict(include_profile=args.profile, grid=args.grid)


def _cmd_nodal(args):
    sols = nodal_solutions(args.ell, args.s, args.a, args.p, max_pairs=args.max_pairs, vol_M=args.vol_M)
    return _doc(args, "nodal periodic solutions", [s.value for s in sols], "phase-plane period inversion",
                "sign-changing solutions of the circle Yamabe equation",
                {"solutions": [_solution_dict(s, args) for s in sols]})


def _cmd_first(args):
    v, w = first_N_yamabe(args.ell, args.s, args.a, args.p, args.vol_M)
    return _doc(args, "first N-Yamabe value", v, "minimum over positive periodic solutions",
                "N-Yamabe constant of M x S^1", {"witness": _solution_dict(w, args)})


def _cmd_second(args):
    v, w = second_N_yamabe(args.ell, args.s, args.a, args.p, args.vol_M, max_pairs=args.max_pairs)
    return _doc(args, "second N-Yamabe value", v, f"minimum over nodal solutions, j <= {args.max_pairs}",
                "second N-Yamabe constant of M x S^1", {"witness": _solution_dict(w, args), "argmin_j": w.j})


def _cmd_sweep_sandwich(args):
    res = sandwich_sweep(args.m, args.t_grid)
    return _doc(args, f"Y2 envelopes on S^{args.m - 1} x S^1", res.target, "circle ODE sweep",
                "limit 2^(2/m) Y(S^m) of the second Yamabe constant", res.to_dict()), res


def _cmd_sweep_limit(args):
    res = y2n_limit_sweep(round_sphere(args.d), args.t_grid, use_solver_alpha=args.solver_alpha,
                          config=_gn_config(args))
    return _doc(args, f"Y2_N of S^{args.d} x S^1", res.target, "circle ODE sweep",
                "large-t limit of the second N-Yamabe constant", res.to_dict()), res


def _cmd_strict(args):
    rep = strict_upper_check(args.m, args.t_grid)
    return _doc(args, f"second N-invariant vs sandwich upper on S^{args.m - 1} x S^1", rep.threshold,
                "circle ODE sweep", "strict upper sandwich inequality", rep.to_dict())


def _cmd_tables(args):
    reps = paper_tables(use_paper_alpha=args.use_paper_alpha, config=_gn_config(args))
    return _doc(args, "bound tables", [[r.lower, r.upper] for r in reps], "closed form",
                "published bound examples", {"reports": [r.to_dict() for r in reps]}), reps


def _cmd_check(args):
    results = run_invariant_suite(args.seed)
    doc = _doc(args, "invariant suite", all(r.passed for r in results), "property checks",
               "internal consistency", {"checks": [r.to_dict() for r in results]})
    return doc, results


_COMMANDS = {
    "constants": _cmd_constants,
    "sphere-yamabe": _cmd_sphere,
    "ah-bounds": _cmd_ah,
    "gn": _cmd_gn,
    "gn-closed": _cmd_gn_closed,
    "spectrum": _cmd_spectrum,
    "nodal": _cmd_nodal,
    "first-n": _cmd_first,
    "second-n": _cmd_second,
    "sweep-sandwich": _cmd_sweep_sandwich,
    "sweep-limit": _cmd_sweep_limit,
    "strict-upper": _cmd_strict,
    "tables": _cmd_tables,
    "check": _cmd_check,
}


def _to_csv(doc, extra, args) -> str:
    buf = io.StringIO()
    buf.write("# schema=1\n")
    buf.write(f"# quantity={doc['quantity']} seed={args.seed} anchor={doc['anchor']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(extra, SweepResult):
        writer.writerow(SweepResult.CSV_COLUMNS)
        for row in extra.csv_rows():
            writer.writerow(_round(row))
    elif isinstance(extra, list) and extra and isinstance(extra[0], BoundReport):
        writer.writerow(("name", "lower", "upper", "formulas"))
        for r in extra:
            writer.writerow(_round([r.name, r.lower, r.upper, "; ".join(r.formulas)]))
    elif isinstance(extra, list):
        writer.writerow(("name", "defect", "tolerance", "passed"))
        for r in extra:
            writer.writerow(_round([r.name, r.defect, r.tolerance, r.passed]))
    else:
        writer.writerow(("key", "value"))
        flat = _round(doc["result"])
        for key, val in flat.items():
            if not isinstance(val, (dict, list)):
                writer.writerow((key, val))
        if not isinstance(doc["value"], (dict, list)):
            writer.writerow(("value", _round(doc["value"])))
        elif isinstance(doc["value"], dict):
            for key, val in _round(doc["value"]).items():
                writer.writerow((key, val))
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        for flag in ("tol_ode", "tol_quad", "tol_bisect"):
            if not getattr(args, flag) > 0:
                raise ValidationError(f"--{flag.replace('_', '-')} must be positive, got {getattr(args, flag)}")
        if args.grid < 16:
            raise ValidationError(f"--grid must be >= 16, got {args.grid}")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        out = _COMMANDS[args.command](args)
        doc, extra = out if isinstance(out, tuple) else (out, None)
        if args.format == "json":
            text = json.dumps(_round(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"
        else:
            text = _to_csv(doc, extra, args)
        _emit(text, args.out)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return EXIT_USAGE
    except ValidationError as exc:
        sys.stderr.write(f"yamabe2: invalid input: {exc}\n")
        return EXIT_VALIDATION
    except (AccuracyError, ConfigurationError) as exc:
        sys.stderr.write(f"yamabe2: accuracy failure: {exc}\n")
        return EXIT_ACCURACY
    except YamabeError as exc:
        sys.stderr.write(f"yamabe2: {exc}\n")
        return EXIT_VALIDATION
    if args.command == "check" and not all(r.passed for r in extra):
        return EXIT_ACCURACY
    return EXIT_OK


def main() -> None:
    sys.exit(run())
