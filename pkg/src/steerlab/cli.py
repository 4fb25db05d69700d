"""Command-line entry point ``steerlab``.

Exit codes:

    0  success (state certified, family certified, search succeeded)
    1  criterion violated / family not certified
    2  inconclusive (raise --grid-n, or the search budget ran out)
    3  invalid state (Hermiticity, trace or positivity defect)
    4  usage error (bad flags or flag values)
    5  malformed input (unreadable file, bad JSON, wrong layout)
    6  Bob's marginal is pure; no canonical form
    7  assemblage not reproducible by the hidden state model
    8  threshold bracket failure
"""
import argparse
import json
import math
import sys

import numpy as np

from steerlab import __version__, kernels
from steerlab.canonical import BobMarginalPure, canonicalize
from steerlab.convex import strengthen, verify_decomposition
from steerlab.criterion import (
    CERTIFIED,
    DEFAULT_GRID_N,
    DEFAULT_REFINE_ITERS,
    INCONCLUSIVE,
    VIOLATED,
    evaluate_criterion,
    fibonacci_sphere,
)
from steerlab.family import BRACKET, BracketError, povm_chsh_threshold, records_to_csv, scan_grid
from steerlab.jm import InvalidPOVM, family_from_json, jm_family_sampler
from steerlab.lhs import MIN_SAMPLES, NotReproducible, fit_direction, simulate_assemblage
from steerlab.qubit import TOL, StateError
from steerlab.statefile import MalformedInput, load_json, load_state, parse_directions, read_text

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INVALID_STATE = 3
EXIT_USAGE = 4
EXIT_MALFORMED = 5
EXIT_PURE_MARGINAL = 6
EXIT_NOT_REPRODUCIBLE = 7
EXIT_BRACKET = 8

VERDICT_EXIT = {CERTIFIED: EXIT_OK, VIOLATED: EXIT_VIOLATED, INCONCLUSIVE: EXIT_INCONCLUSIVE}
AXES = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flags(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _canonical_report(args):
    rho = load_state(args.state, args.tolerance)
    rec = canonicalize(rho, args.tolerance)
    return rho, rec


def cmd_check(args):
    _, rec = _canonical_report(args)
    rep = evaluate_criterion(
        rec.canonical, grid_n=args.grid_n, refine_iters=args.refine_iters, tol=args.tolerance, method=args.method
    )
    out = {"command": "check", "flags": _flags(args), "canonical": rec.to_dict(), "report": rep.to_dict()}
    if rep.verdict == INCONCLUSIVE:
        out["hint"] = "inconclusive: rerun with a larger --grid-n"
    _emit(out)
    return VERDICT_EXIT[rep.verdict]


def cmd_canonicalize(args):
    _, rec = _canonical_report(args)
    _emit({"command": "canonicalize", "flags": _flags(args), "canonical": rec.to_dict()})
    return EXIT_OK


def _directions(args):
    if args.directions_file:
        return parse_directions(load_json(read_text(args.directions_file), "directions file"))
    if args.fibonacci:
        return fibonacci_sphere(args.fibonacci)
    return np.array(AXES, dtype=float)


def cmd_simulate(args):
    if args.samples < MIN_SAMPLES:
        raise UsageError(f"--samples must be at least {MIN_SAMPLES}")
    _, rec = _canonical_report(args)
    state = rec.canonical
    dirs = _directions(args)
    if not args.force:
        rep = evaluate_criterion(state, grid_n=args.grid_n, tol=args.tolerance)
        if rep.verdict != CERTIFIED:
            _emit({"command": "simulate", "flags": _flags(args), "error": "state not certified",
                   "report": rep.to_dict(), "hint": "pass --force to simulate the directions anyway"})
            return EXIT_NOT_REPRODUCIBLE
    failing = []
    for x in dirs:
        try:
            fit_direction(state, x)
        except NotReproducible as err:
            failing.append({"direction": err.direction, "message": str(err)})
    if failing:
        _emit({"command": "simulate", "flags": _flags(args), "error": "NotReproducible", "directions": failing})
        return EXIT_NOT_REPRODUCIBLE
    report = simulate_assemblage(state, dirs, args.samples, args.seed)
    _emit({"command": "simulate", "flags": _flags(args), "report": report.to_dict()})
    return EXIT_OK


def cmd_scan_family(args):
    records = scan_grid(args.p_steps, args.chi_steps, (args.p_min, args.p_max), (0.0, args.chi_max),
                        threads=kernels.thread_count())
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            records_to_csv(records, fh)
    else:
        records_to_csv(records, sys.stdout)
    return EXIT_OK


def cmd_threshold(args):
    lo, hi = args.bracket
    if not 0.5 < lo < hi < 1.0:
        raise UsageError("--bracket needs 1/2 < LO < HI < 1")
    p_star = povm_chsh_threshold(args.tol, (lo, hi))
    _emit({"command": "threshold", "flags": _flags(args), "p_star": p_star})
    return EXIT_OK


def cmd_jm(args):
    source = args.povm
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith(("{", "[")):
        text = source
    else:
        text = read_text(source)
    family = family_from_json(load_json(text, "POVM input"))
    rep = jm_family_sampler(family, args.n_directions)
    _emit({"command": "jm", "flags": _flags(args), "report": rep.to_dict()})
    return {"certified": EXIT_OK, "not_certified": EXIT_VIOLATED}.get(rep.verdict, EXIT_INCONCLUSIVE)


def cmd_strengthen(args):
    rho = load_state(args.state, args.tolerance)
    dec = strengthen(rho, budget=args.budget, seed=args.seed, grid_n=args.grid_n, tol=args.tolerance)
    out = {"command": "strengthen", "flags": _flags(args)}
    if dec is None:
        out["decomposition"] = None
        out["hint"] = "no decomposition found within budget; this is not a steerability verdict"
        _emit(out)
        return EXIT_INCONCLUSIVE
    out["decomposition"] = dec.to_dict()
    out["verification"] = verify_decomposition(rho, dec, args.grid_n, args.tolerance).to_dict()
    _emit(out)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="steerlab", description="Unsteerability certificates for two-qubit states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def state_cmd(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("state", help="state JSON file, or - for stdin")
        p.add_argument("--tolerance", type=float, default=TOL)
        p.set_defaults(func=func)
        return p

    p = state_cmd("check", cmd_check, "evaluate the unsteerability criterion")
    p.add_argument("--grid-n", type=_positive_int, default=DEFAULT_GRID_N)
    p.add_argument("--refine-iters", type=int, default=DEFAULT_REFINE_ITERS)
    p.add_argument("--method", choices=["auto", "grid"], default="auto")

    state_cmd("canonicalize", cmd_canonicalize, "print the canonical form")

    p = state_cmd("simulate", cmd_simulate, "Monte Carlo check of the hidden state model")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--directions-file", help="JSON list of [x, y, z]")
    g.add_argument("--fibonacci", type=_positive_int, help="use N Fibonacci-lattice directions")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true", help="skip the certification precheck")
    p.add_argument("--grid-n", type=_positive_int, default=DEFAULT_GRID_N)

    p = sub.add_parser("scan-family", help="classify rho(p, chi) on a grid (CSV)")
    p.add_argument("--p-steps", type=_positive_int, default=50)
    p.add_argument("--chi-steps", type=_positive_int, default=50)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--chi-max", type=float, default=math.pi / 4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan_family)

    p = sub.add_parser("threshold", help="CHSH threshold of the one-way POVM construction")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"), default=list(BRACKET))
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("jm", help="joint measurability of a dichotomic POVM family")
    p.add_argument("povm", help="JSON file, - for stdin, or an inline JSON document")
    p.add_argument("--n-directions", type=_positive_int, default=2000)
    p.set_defaults(func=cmd_jm)

    p = state_cmd("strengthen", cmd_strengthen, "search for a certified convex decomposition")
    p.add_argument("--budget", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-n", type=_positive_int, default=DEFAULT_GRID_N)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MalformedInput as err:
        code, msg = EXIT_MALFORMED, str(err)
    except BobMarginalPure as err:
        code, msg = EXIT_PURE_MARGINAL, str(err)
    except InvalidPOVM as err:
        code, msg = EXIT_MALFORMED, f"invalid POVM: {err}"
    except StateError as err:
        code, msg = EXIT_INVALID_STATE, str(err)
    except NotReproducible as err:
        code, msg = EXIT_NOT_REPRODUCIBLE, str(err)
    except BracketError as err:
        code, msg = EXIT_BRACKET, str(err)
    except (UsageError, ValueError) as err:
        code, msg = EXIT_USAGE, str(err)
    sys.stderr.write(f"steerlab: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
