"""Command-line entry point: ``firesale <subcommand> ...``.

Exit status 0 on success, 1 on usage or input errors (and on failed hard
checks under ``validate``), 2 on convergence or numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .analytics import rate_sweep
from .clearing import ClearingConfig, ClearingError, picard_clearing
from .curves import CurveError
from .equilibrium import InnerSolverError, PriceDomainError
from .model import ScenarioError
from .sensitivity import SensitivityError, finite_difference_sensitivity, rate_sensitivity
from .symmetric import SymmetricDomainError, SymmetricScenario, symmetric_solve
from .validation import fundamental_solvency, uniqueness_condition, validate_scenario

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2
MECHANISMS = ("vwap", "lob")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _mechanism_list(text):
    mechs = [m.strip().lower() for m in text.split(",") if m.strip()]
    bad = [m for m in mechs if m not in MECHANISMS]
    if bad or not mechs:
        raise argparse.ArgumentTypeError(f"mechanisms must be drawn from {', '.join(MECHANISMS)}")
    return mechs


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="firesale", description="Fire-sale clearing with repo borrowing.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="maximal or minimal clearing solution")
    s.add_argument("--scenario", required=True)
    s.add_argument("--mechanism", choices=MECHANISMS, default="vwap")
    s.add_argument("--direction", choices=("maximal", "minimal"), default="maximal")
    s.add_argument("--out", help="per-bank CSV (default: stdout)")
    s.add_argument("--report-out", help="also write the text report here")

    w = sub.add_parser("sweep", help="clearing across a grid of repo rates")
    w.add_argument("--scenario", required=True)
    w.add_argument("--mechanisms", type=_mechanism_list, default=list(MECHANISMS))
    w.add_argument("--r-from", type=float, default=0.0)
    w.add_argument("--r-to", type=float, default=0.1)
    w.add_argument("--r-steps", type=int, default=50, help="number of grid points")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", help="sweep CSV (default: stdout)")

    d = sub.add_parser("sensitivity", help="derivatives of the clearing solution in the repo rate")
    d.add_argument("--scenario", required=True)
    d.add_argument("--mechanism", choices=MECHANISMS, default="vwap")
    d.add_argument("--fd-check", action="store_true", help="compare with central differences")
    d.add_argument("--fallback-fd", action="store_true", help="use differences on a regime tie")

    v = sub.add_parser("validate", help="assumption checks, solvency and uniqueness")
    v.add_argument("--scenario", required=True)

    y = sub.add_parser("symmetric", help="closed-form solution for identical banks")
    y.add_argument("--n", type=int, required=True)
    y.add_argument("--a", type=float, required=True)
    y.add_argument("--h", type=float, required=True)
    y.add_argument("--r", type=float, required=True)
    y.add_argument("--alpha", type=float, required=True)
    y.add_argument("--mechanism", choices=MECHANISMS, default="vwap")

    c = sub.add_parser("calibrate", help="scenario file from balance-sheet CSV")
    c.add_argument("--eba-csv", required=True)
    c.add_argument("--omega", type=float, default=0.05)
    c.add_argument("--gamma", type=float, default=0.7)
    c.add_argument("--rate", type=float, default=0.0)
    c.add_argument("--out", help="scenario file (default: stdout)")
    return p


def _emit(text, path):
    if path:
        io.atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args):
    sc = io.read_scenario(args.scenario)
    rep = picard_clearing(sc, ClearingConfig(mechanism=args.mechanism, direction=args.direction))
    text = io.emit_report(sc, rep)
    if args.report_out:
        io.atomic_write(args.report_out, text)
    if args.out:
        io.atomic_write(args.out, io.solve_csv(sc, rep))
        sys.stdout.write(text)
    else:
        sys.stdout.write(io.solve_csv(sc, rep))
    return EXIT_OK


def _cmd_sweep(args):
    sc = io.read_scenario(args.scenario)
    if args.r_steps < 1:
        raise UsageError("--r-steps must be >= 1")
    grid = [args.r_from] if args.r_steps == 1 else np.linspace(args.r_from, args.r_to, args.r_steps)
    rows = rate_sweep(sc, grid, args.mechanisms, workers=args.workers)
    _emit(io.sweep_csv(rows), args.out)
    failed = [r for r in rows if not r["converged"]]
    for r in failed:
        print(f"r={io.fmt(r['r'])} {r['mechanism']}: {r.get('error', 'not converged')}", file=sys.stderr)
    return EXIT_CONVERGENCE if failed else EXIT_OK


def _fmt_vec(x):
    return "[" + ", ".join(io.fmt(v) for v in np.atleast_1d(x)) + "]"


def _cmd_sensitivity(args):
    sc = io.read_scenario(args.scenario)
    rep = picard_clearing(sc, ClearingConfig(mechanism=args.mechanism))
    sens = rate_sensitivity(sc, rep, fallback_fd=args.fallback_fd)
    lines = [
        f"mechanism = {sens.mechanism.value}",
        f"method = {'finite differences' if sens.fd_fallback else 'analytic'}",
        "regimes = " + ", ".join(f"{b}:{t.value}" for b, t in zip(sc.ids, sens.regimes)),
        f"dq_dr = {io.fmt(sens.dq_dr)}",
        f"dqbar_dr = {_fmt_vec(sens.dqbar_dr)}",
        f"ds_dr = {_fmt_vec(sens.ds_dr)}",
        f"dtotal_dr = {io.fmt(sens.dtotal_dr)}",
    ]
    for key in ("c", "d", "c_tilde", "d_tilde", "A", "B"):
        if key in sens.constants:
            lines.append(f"{key} = {io.fmt(sens.constants[key])}")
    if args.fd_check:
        fd = finite_difference_sensitivity(sc, args.mechanism)
        lines += ["", "finite differences (dr = 1e-6):", f"dq_dr = {io.fmt(fd.dq_dr)}",
                  f"dqbar_dr = {_fmt_vec(fd.dqbar_dr)}", f"dtotal_dr = {io.fmt(fd.dtotal_dr)}"]
        scale = max(abs(fd.dq_dr), 1e-12)
        lines.append(f"relative gap in dq_dr = {io.fmt(abs(sens.dq_dr - fd.dq_dr) / scale)}")
    print("\n".join(lines))
    return EXIT_OK


def _cmd_validate(args):
    sc = io.read_scenario(args.scenario)
    report = validate_scenario(sc)
    print(report)
    print()
    for mech in MECHANISMS:
        solv = fundamental_solvency(sc, mech)
        flags = ", ".join(f"{b}:{'yes' if ok else 'no'}" for b, ok in zip(sc.ids, solv))
        print(f"fundamentally solvent [{mech}]: {flags}")
    for mech in MECHANISMS:
        u = uniqueness_condition(sc, mech)
        verdict = "holds" if u.holds else "does not hold"
        extra = f" ({u.caveat})" if u.caveat else ""
        print(f"uniqueness [{mech}]: lhs = {io.fmt(u.lhs)}, rhs = {io.fmt(u.rhs)}, {verdict}{extra}")
    return EXIT_OK if report.passed else EXIT_USAGE


def _cmd_symmetric(args):
    sym = SymmetricScenario(args.n, args.a, args.h, args.r, args.alpha)
    sol = symmetric_solve(sym, args.mechanism)
    print(f"region = {sol.region}\nq = {io.fmt(sol.q)}\nqbar = {io.fmt(sol.qbar)}\ns = {io.fmt(sol.s)}")
    return EXIT_OK


def _cmd_calibrate(args):
    recs = io.read_eba_csv(args.eba_csv)
    sc = io.calibrate_eba(recs, io.CalibrationPolicy(omega=args.omega, gamma=args.gamma))
    if args.rate:
        sc = sc.with_rate(args.rate)
    _emit(io.emit_scenario(sc), args.out)
    return EXIT_OK


COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "sensitivity": _cmd_sensitivity,
    "validate": _cmd_validate,
    "symmetric": _cmd_symmetric,
    "calibrate": _cmd_calibrate,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help exits 0, usage errors exit 1
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ClearingError, InnerSolverError, SensitivityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (UsageError, OSError, ScenarioError, CurveError, PriceDomainError, SymmetricDomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
