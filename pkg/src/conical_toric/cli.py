"""Command line: ``analyze``, ``solve``, ``ode`` and ``catalog``.

Exit codes: 0 success, 1 parse or usage error, 2 validation error (not Fano,
not Delzant, ...), 3 solver failure.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .catalog import CATALOG, ParseError, analyze, catalog_entry, fmt_fraction, format_polytope, parse_polytope
from .guillemin import NoConvergence
from .ma_solver import (ContinuityStalled, ConvexityLost, RhoGrid, SolverConfig, barycenter_identity_check,
                        continuity_solve, dump_grid, ma_residual, pushforward_mass_check, reference_data,
                        toric_functionals)
from .polytope_core import PolytopeError
from .special_solutions import calabi_constraint, calabi_roots, nonexistence_certificate, p1_conical_potential
from .toric_invariants import AlphaOutOfRange, greatest_ricci_lower_bound

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _load(args):
    """Resolve the polytope from ``--catalog``, ``--input`` or the positional target."""
    sources = [s for s in (args.catalog, args.input, args.target) if s]
    if len(sources) != 1:
        raise UsageError("give exactly one of a catalog name, --catalog NAME or --input FILE")
    if args.input or (args.target and args.target not in CATALOG and Path(args.target).exists()):
        path = Path(args.input or args.target)
        return parse_polytope(path.read_text()), path.name
    name = args.catalog or args.target
    try:
        return catalog_entry(name).polytope, name
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _emit(pairs, machine, out):
    for key, value in pairs:
        if machine:
            print(f"{key}\t{value}", file=out)
        else:
            text = fmt_fraction(value) if isinstance(value, Fraction) else value
            print(f"{key:>26}: {text}", file=out)


def cmd_analyze(args, out):
    P, name = _load(args)
    print(analyze(P, alpha=args.alpha, name=name).render(machine=args.machine), file=out)
    return EXIT_OK


def cmd_catalog(args, out):
    status = EXIT_OK
    for entry in CATALOG.values():
        P = entry.polytope
        if args.check:
            bad = entry.self_test()
            roundtrip = parse_polytope(format_polytope(P)) == P
            verdict = "ok" if not bad and roundtrip else "MISMATCH " + ",".join(bad + ([] if roundtrip else ["format"]))
            if bad or not roundtrip:
                status = EXIT_VALIDATION
        else:
            verdict = entry.description
        if args.machine:
            print(f"{entry.name}\t{P.dim}\t{entry.known.R}\t{verdict}", file=out)
        else:
            print(f"{entry.name:>6}  n={P.dim}  R={fmt_fraction(entry.known.R):<16} {verdict}", file=out)
    return status


def cmd_solve(args, out):
    P, name = _load(args)
    if P.dim > 2:
        raise UsageError("the solver handles n = 1, 2 only")
    report = greatest_ricci_lower_bound(P)
    alpha = args.alpha
    if alpha is None:
        raise UsageError("solve needs --alpha")
    if not 0 < alpha <= 1:
        raise UsageError("--alpha must lie in (0, 1]")
    if alpha > report.R and not args.force:
        raise UsageError(f"alpha = {alpha} exceeds R(X) = {report.R} for {name}; "
                         "D(tau(alpha)) is not effective there (use --force to run anyway)")
    M = args.grid or (513 if P.dim == 1 else 129)
    B = args.box or (16.0 if P.dim == 1 else 12.0)
    grid = RhoGrid(P.dim, B, M)
    config = SolverConfig(alpha=alpha, newton_tol=args.tol, force=args.force,
                          boundary=args.boundary, hessian=args.hessian)
    ref = reference_data(P, report, alpha, grid, boundary=args.boundary, hessian=args.hessian)
    try:
        phi, trace = continuity_solve(P, report, config, grid, reference=ref)
    except ContinuityStalled as exc:
        print(exc.trace.summary(), file=out)
        print(f"solver failure: {exc}", file=out)
        return EXIT_SOLVER
    except ConvexityLost as exc:
        print(f"solver failure: {exc}", file=out)
        return EXIT_SOLVER
    if not args.machine:
        print(trace.summary(), file=out)
    mass, target = pushforward_mass_check(phi)
    I, J, F = toric_functionals(phi, ref[0], float(alpha), report.P_c)
    pairs = [("polytope", name), ("alpha", alpha), ("R", report.R), ("grid", M), ("box", B),
             ("status", trace.status), ("residual", f"{ma_residual(phi, report.P_c, alpha):.3e}"),
             ("mass", f"{mass:.10g}"), ("mass_target", f"{target:.10g}"),
             ("mass_defect", f"{abs(mass - target):.3e}"),
             ("barycenter_defect", f"{barycenter_identity_check(phi, alpha, report.P_c):.3e}"),
             ("I", f"{I:.6e}"), ("J", f"{J:.6e}"), ("F", f"{F:.6e}")]
    if P.dim == 1 and sorted(P.normals) == [(-1,), (1,)]:
        closed = p1_conical_potential(alpha)
        rho = grid.axis
        window = np.abs(rho) <= B / 2
        diff = (phi.values - closed.value(rho))[window]
        pairs.append(("closed_form_sup_error", f"{(diff.max() - diff.min()) / 2:.3e}"))
    _emit(pairs, args.machine, out)
    if args.dump:
        dump_grid(phi, args.dump)
    return EXIT_OK


def cmd_ode(args, out):
    a, b = args.a, args.b
    if not 0 < a < b:
        raise UsageError("ode needs 0 < a < b")
    roots = calabi_roots(float(a), float(b), samples=args.samples)
    pairs = [("a", a), ("b", b), ("constraint", f"g(alpha) = ({b}*alpha - 1)*exp({b - a}*alpha) + 1 - {a}*alpha"),
             ("g(1/3)", f"{float(calabi_constraint(1 / 3, float(a), float(b))):.12g}"),
             ("scan_samples", args.samples),
             ("roots_in_(0,1]", " ".join(f"{r:.12g}" for r in roots) if roots else "none")]
    cert = nonexistence_certificate(a, b, samples=args.samples)
    pairs += [("certificate", cert.summary() if cert.holds else "not certified")]
    _emit(pairs, args.machine, out)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="conical-toric", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def polytope_args(p):
        p.add_argument("target", nargs="?", help="catalog name or polytope file")
        p.add_argument("--catalog", metavar="NAME")
        p.add_argument("--input", metavar="FILE")
        p.add_argument("--machine", action="store_true", help="tab-separated key/value output")

    p = sub.add_parser("analyze", help="exact invariants of a Fano polytope")
    polytope_args(p)
    p.add_argument("--alpha", type=_fraction)

    p = sub.add_parser("solve", help="continuity-method Monge-Ampere solve (n <= 2)")
    polytope_args(p)
    p.add_argument("--alpha", type=_fraction)
    p.add_argument("--grid", type=int, metavar="M")
    p.add_argument("--box", type=float, metavar="B")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--dump", metavar="FILE")
    p.add_argument("--force", action="store_true")
    p.add_argument("--boundary", choices=("neumann", "dirichlet"), default="neumann")
    p.add_argument("--hessian", choices=("hybrid", "discrete"), default="hybrid")

    p = sub.add_parser("ode", help="Calabi-symmetry ODE constraint and certificate")
    p.add_argument("--a", type=_fraction, default=Fraction(1))
    p.add_argument("--b", type=_fraction, default=Fraction(3))
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--machine", action="store_true")

    p = sub.add_parser("catalog", help="list built-in polytopes")
    p.add_argument("--check", action="store_true", help="recompute and compare known values")
    p.add_argument("--machine", action="store_true")
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        handler = {"analyze": cmd_analyze, "solve": cmd_solve, "ode": cmd_ode, "catalog": cmd_catalog}
        return handler[args.command](args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PolytopeError, AlphaOutOfRange) as exc:
        witness = getattr(exc, "witness", None)
        if isinstance(witness, tuple):
            witness = "(" + ", ".join(str(w) for w in witness) + ")"
        message = exc.args[0] if exc.args else str(exc)
        print(f"validation error: {message}" + (f" [witness {witness}]" if witness is not None else ""),
              file=sys.stderr)
        return EXIT_VALIDATION
    except (NoConvergence, ContinuityStalled, ConvexityLost) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
