"""Command line entry point: ``fdemg {solve,table,verify,spectra}``.

Every command writes ``<out-dir>/<command>-<timestamp>.csv`` plus a JSON
``.manifest`` next to it.  Exit codes: 0 success, 1 solver or check failure,
2 invalid flags.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .fde_driver import SolveReport, time_march
from .krylov import SolverConfig
from .precond import KINDS
from .problems import FdeProblem, Grid, constant_problem, example2, example3, get_example
from .structured_ops import DENSE_CAP
from .symbols import CoeffSet, bttb_symbol_eigs, eval_F, eval_f_gamma, eval_h, eval_q_gamma
from .verification import SUITES, run_suite

log = logging.getLogger("fdemg")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# Preconditioner columns per reproduced table.  The literature preconditioner
# compared against in tables 2 and 3 is not implemented.
TABLE_COLUMNS = {
    1: ("none", "p2", "p2-exact", "mgm", "mgm-galerkin"),
    2: ("none", "p2", "mgm"),
    3: ("none", "p2", "mgm"),
}
TABLE_NOTES = {
    1: "",
    2: "P_JLZ column omitted (literature preconditioner, not implemented)",
    3: "P_JLZ column omitted (literature preconditioner, not implemented)",
}
PRESETS = ("constant", "ex2", "ex3")


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int = 0
    versions: dict = field(default_factory=dict)
    notes: str = ""

    @classmethod
    def make(cls, command: str, args: argparse.Namespace, notes: str = "") -> "RunManifest":
        params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
        versions = {
            "fdemg": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(),
        }
        return cls(command, params, int(getattr(args, "seed", 0) or 0), versions, notes)


def fmt(x) -> str:
    """Scientific notation with 7 significant digits; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6e}"
    return str(x)


def write_outputs(out_dir: str, command: str, header: list[str], rows: list[list], manifest: RunManifest) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now().strftime("%Y%m%dT%H%M%S%f")
    path = out / f"{command}-{stamp}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    path.with_suffix(".manifest").write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return path


# -- problem selection ------------------------------------------------------------

def _parse_floats(text: str, count: int, flag: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects {count} comma-separated numbers") from None
    if len(vals) != count:
        raise UsageError(f"{flag} expects {count} comma-separated numbers")
    return vals


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError("--sizes expects comma-separated integers") from None
    if any(n < 2 for n in sizes):
        raise UsageError("sizes must be >= 2")
    return sizes


def select_problem(args) -> FdeProblem:
    try:
        if args.example is not None:
            if args.coeff_preset or args.domain:
                raise UsageError("--coeff-preset/--domain apply to user problems, not --example")
            if args.alpha is None and args.beta is None:
                return get_example(args.example)
            if args.example == 1:
                raise UsageError("example 1 has fixed orders; use --example 2 or 3 to vary them")
            base = get_example(args.example)
            a = base.alpha if args.alpha is None else args.alpha
            b = base.beta if args.beta is None else args.beta
            return (example2 if args.example == 2 else example3)(a, b)
        if args.alpha is None or args.beta is None:
            raise UsageError("a user problem needs --alpha and --beta (or use --example)")
        preset = args.coeff_preset or "constant"
        if preset == "constant":
            dom = _parse_floats(args.domain, 4, "--domain") if args.domain else (0.0, 1.0, 0.0, 1.0)
            return constant_problem(args.alpha, args.beta, domain=dom)
        if args.domain and _parse_floats(args.domain, 4, "--domain") != (0.0, 1.0, 0.0, 1.0):
            raise UsageError(f"preset {preset!r} is defined on the unit square only")
        p = (example2 if preset == "ex2" else example3)(args.alpha, args.beta)
        return replace(p, name=f"{preset}[{args.alpha},{args.beta}]")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def default_restart(precond: str, restart: int | None) -> int:
    """Unpreconditioned runs default to no restart, all others to 20."""
    if restart is not None:
        if restart < 0:
            raise UsageError("--restart must be >= 0 (0 = no restart)")
        return restart
    return 0 if precond == "none" else 20


def run_cell(p: FdeProblem, n: int, m: int | None, precond: str, tol: float, restart: int | None,
             omega: float, cycles: int) -> SolveReport:
    g = Grid.for_problem(p, n, n, m or n)
    cfg = SolverConfig(tol=tol, restart=default_restart(precond, restart))
    return time_march(p, g, cfg, precond=precond, omega=omega, cycles=cycles)


def _check_common(args):
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.omega <= 0:
        raise UsageError("--omega must be positive")
    if args.vcycles_per_apply < 1:
        raise UsageError("--vcycles-per-apply must be >= 1")


# -- commands ----------------------------------------------------------------------

SOLVE_HEADER = ["example", "n", "precond", "avg_iters", "error_inf", "wall_time"]


def cmd_solve(args) -> int:
    _check_common(args)
    p = select_problem(args)
    if args.n < 2 or (args.m is not None and args.m < 1):
        raise UsageError("--n must be >= 2 and --m >= 1")
    rep = run_cell(p, args.n, args.m, args.precond, args.tol, args.restart, args.omega, args.vcycles_per_apply)
    err = rep.final_error_inf if rep.final_error_inf is not None else float("nan")
    row = [p.name, args.n, args.precond, rep.avg_iterations, err, rep.wall_time]
    path = write_outputs(args.out_dir, "solve", SOLVE_HEADER, [row], RunManifest.make("solve", args))
    print(f"{p.name} n={args.n} precond={args.precond} avg_iters={rep.avg_iterations:.3f} "
          f"error_inf={err:.4e} time={rep.wall_time:.2f}s -> {path}")
    if not rep.all_converged:
        bad = [i + 1 for i, c in enumerate(rep.converged) if not c]
        print(f"solver failed to converge at steps {bad}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_table(args) -> int:
    _check_common(args)
    sizes = _parse_sizes(args.sizes)
    cols = TABLE_COLUMNS[args.table]
    p = get_example(args.table)
    header = ["n"] + [f"iters_{c}" for c in cols] + ["error_inf"]
    rows, failed = [], False
    for n in sizes:
        row: list = [n]
        err = float("nan")
        for c in cols:
            rep = run_cell(p, n, None, c, args.tol, args.restart, args.omega, args.vcycles_per_apply)
            failed |= not rep.all_converged
            row.append(rep.avg_iterations)
            if c == "mgm" or np.isnan(err):
                err = rep.final_error_inf
            print(f"table {args.table} n={n} {c}: {rep.avg_iterations:.3f} ({rep.wall_time:.1f}s)", flush=True)
        row.append(err)
        rows.append(row)
    manifest = RunManifest.make("table", args, notes=TABLE_NOTES[args.table])
    path = write_outputs(args.out_dir, "table", header, rows, manifest)
    print(",".join(header))
    for r in rows:
        print(",".join(fmt(v) for v in r))
    if TABLE_NOTES[args.table]:
        print(f"note: {TABLE_NOTES[args.table]}")
    print(f"-> {path}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(args.suite, seed=args.seed)
    rows = [[c.suite, c.name, c.passed, c.value, c.detail] for c in results]
    path = write_outputs(args.out_dir, "verify", ["suite", "check", "passed", "value", "detail"], rows,
                         RunManifest.make("verify", args))
    for c in results:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.suite}/{c.name} {c.value:.5e} {c.detail}".rstrip())
    failing = [f"{c.suite}/{c.name}" for c in results if not c.passed]
    print(f"{len(results) - len(failing)}/{len(results)} checks passed -> {path}")
    if failing:
        print("failing: " + ", ".join(failing), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_spectra(args) -> int:
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    a, b = args.alpha, args.beta
    try:
        t = np.linspace(-np.pi, np.pi, args.points)
        if args.what == "f":
            v = eval_f_gamma(args.gamma, t)
            header, rows = ["xi", "re", "im"], [[x, z.real, z.imag] for x, z in zip(t, v)]
        elif args.what == "q":
            header, rows = ["xi", "q"], [[x, q] for x, q in zip(t, eval_q_gamma(args.gamma, t))]
        elif args.what in ("F", "h"):
            T1, T2 = np.meshgrid(t, t, indexing="ij")
            if args.what == "F":
                V = eval_F(a, b, args.d, args.e, args.s_over_r, T1, T2)
                header = ["theta1", "theta2", "F"]
                rows = [[x, y, v] for x, y, v in zip(T1.ravel(), T2.ravel(), V.ravel())]
            else:
                pt = _parse_floats(args.point, 2, "--point")
                V = eval_h(a, b, _preset_coeffs(args), args.s_over_r, pt, T1, T2)
                header = ["theta1", "theta2", "re", "im"]
                rows = [[x, y, v.real, v.imag] for x, y, v in zip(T1.ravel(), T2.ravel(), V.ravel())]
        else:
            if args.n * args.n > DENSE_CAP:
                raise UsageError(f"eigs needs n*n <= {DENSE_CAP}")
            ev = bttb_symbol_eigs(a, b, args.d, args.e, args.s_over_r, args.n)
            header, rows = ["index", "eigenvalue"], [[i, v] for i, v in enumerate(ev)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    path = write_outputs(args.out_dir, "spectra", header, rows, RunManifest.make("spectra", args))
    print(f"{len(rows)} rows of {args.what} -> {path}")
    return EXIT_OK


def _preset_coeffs(args) -> CoeffSet:
    if args.coeff_preset in (None, "constant"):
        return CoeffSet.constant(args.d, args.e)
    p = (example2 if args.coeff_preset == "ex2" else example3)(args.alpha, args.beta)
    return CoeffSet(*(lambda x, y, f=f: f(x, y, 0.0) for f in (p.d_plus, p.d_minus, p.e_plus, p.e_minus)))


# -- parser ------------------------------------------------------------------------

def _add_solver_flags(sp: argparse.ArgumentParser):
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.add_argument("--restart", type=int, default=None,
                    help="GMRES restart length; 0 = none (default: 0 for --precond none, else 20)")
    sp.add_argument("--omega", type=float, default=0.9, help="Jacobi damping")
    sp.add_argument("--vcycles-per-apply", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fdemg", description="Multigrid-preconditioned CN-WSGD solver for 2D space FDEs")
    ap.add_argument("--out-dir", default="results", help="directory for CSV and manifest files")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one time march")
    s.add_argument("--example", type=int, choices=(1, 2, 3))
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--domain", help="a1,b1,a2,b2 (constant preset only)")
    s.add_argument("--coeff-preset", choices=PRESETS)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, help="time steps (default n)")
    s.add_argument("--precond", choices=KINDS, default="mgm")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("table", help="reproduce a results table")
    t.add_argument("--table", type=int, choices=(1, 2, 3), required=True)
    t.add_argument("--sizes", default="16,32,64")
    _add_solver_flags(t)
    t.set_defaults(func=cmd_table)

    v = sub.add_parser("verify", help="run numerical property suites")
    v.add_argument("--suite", choices=SUITES, default="all")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    sp = sub.add_parser("spectra", help="export symbol samples or eigenvalues")
    sp.add_argument("--what", choices=("f", "q", "F", "h", "eigs"), required=True)
    sp.add_argument("--gamma", type=float, default=1.5)
    sp.add_argument("--alpha", type=float, default=1.8)
    sp.add_argument("--beta", type=float, default=1.6)
    sp.add_argument("--d", type=float, default=1.0)
    sp.add_argument("--e", type=float, default=1.0)
    sp.add_argument("--s-over-r", type=float, default=1.0)
    sp.add_argument("--points", type=int, default=256)
    sp.add_argument("--n", type=int, default=16, help="matrix order per direction for eigs")
    sp.add_argument("--point", default="0.5,0.5", help="x,y for --what h")
    sp.add_argument("--coeff-preset", choices=PRESETS)
    sp.set_defaults(func=cmd_spectra)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fdemg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
