"""Command line front end: solve, compare, plot.

Exit codes: 2 for unreadable or malformed input files, 3 for inputs that
parse but fail validation, 4 for numerical failures inside the solver.
The environment variable SYMMPC_SEED is reserved; enumeration is
deterministic, so nothing reads it today.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from .condense import condense
from .enumeration import run_dp
from .errors import NumericalError, ValidationError
from .lp import EPS_DEGENERATE
from .ocp import load_problem, validate
from .postprocess import ExplicitSolution, build_solution
from .symmetry import (
    SymmetryPair,
    close_group,
    orbit_of,
    permutations_for,
    validate_pair,
)

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

_PARSE_ERRORS = (OSError, json.JSONDecodeError, KeyError, TypeError,
                 ValueError)
_EPS_RANGE = (1e-14, 1e-3)


def _fail(code: int, message: str):
    print(f"symmpc: {message}", file=sys.stderr)
    raise SystemExit(code)


def _load(path, with_symmetry: bool):
    """Problem file -> (validated problem, closed group or None)."""
    try:
        spec, raw_pairs = load_problem(path)
    except _PARSE_ERRORS as exc:
        _fail(EXIT_PARSE, f"cannot read problem file {path}: {exc}")
    ocp = validate(spec)
    if not with_symmetry:
        return ocp, None
    pairs = [SymmetryPair(theta, omega) for theta, omega in raw_pairs]
    for pair in pairs:
        validate_pair(ocp, pair)
    return ocp, close_group(pairs, ocp)


def _check_eps(value: float) -> float:
    lo, hi = _EPS_RANGE
    if not lo <= value <= hi:
        raise ValidationError(
            f"degeneracy tolerance {value} outside [{lo}, {hi}]")
    return value


def cmd_solve(args) -> int:
    ocp, group = _load(args.problem, not args.no_symmetry)
    eps = _check_eps(args.eps_degenerate)

    trace_fh = None
    trace = None
    if args.trace:
        trace_fh = open(args.trace, "w", encoding="utf-8")

        def trace(record):
            trace_fh.write(json.dumps(record) + "\n")

    try:
        result = run_dp(ocp, group=group, n_max=args.n,
                        orbit_dedup=args.orbit_dedup, parallel=args.parallel,
                        trace=trace, eps_degenerate=eps)
    finally:
        if trace_fh is not None:
            trace_fh.close()

    solution = build_solution(result, group)
    out = Path(args.out) if args.out else Path(
        Path(args.problem).stem + "_solution.json")
    solution.save(out)

    opt, feas = result.counter.as_tuple()
    print(f"mode:            {result.mode}")
    print(f"horizon reached: {result.horizon}"
          + (" (converged early)" if result.converged_early else ""))
    print(f"pieces |M_N|:    {len(solution.pieces)}")
    print(f"reduced sets:    {len(result.state.reduced)}")
    print(f"LPs solved:      {opt + feas} "
          f"({opt} optimality + {feas} feasibility)")
    print(f"wall time:       {result.seconds:.3f} s")
    print(f"solution file:   {out}")
    return 0


def _expand_per_horizon(ocp, group, snapshot):
    """Orbit-expand one horizon's reduced family."""
    qp = condense(ocp, snapshot.horizon)
    perms = permutations_for(qp, group)
    expanded = set()
    for a in snapshot.reduced:
        expanded.update(orbit_of(a, perms).members)
    return expanded


def cmd_compare(args) -> int:
    ocp, group = _load(args.problem, True)

    t0 = time.perf_counter()
    base = run_dp(ocp, group=None, n_max=args.n)
    symm = run_dp(ocp, group=group, n_max=args.n)
    total = time.perf_counter() - t0

    rows = []
    all_equal = len(base.snapshots) == len(symm.snapshots)
    for snap_b, snap_s in zip(base.snapshots, symm.snapshots):
        expanded = _expand_per_horizon(ocp, group, snap_s)
        equal = expanded == set(snap_b.reduced)
        all_equal = all_equal and equal
        lps_b = snap_b.n_optimality + snap_b.n_feasibility
        lps_s = snap_s.n_optimality + snap_s.n_feasibility
        rows.append({
            "n": snap_b.horizon,
            "lps_baseline": lps_b,
            "seconds_baseline": snap_b.seconds,
            "lps_symmetric": lps_s,
            "seconds_symmetric": snap_s.seconds,
            "reduction_percent": 100.0 * (1.0 - lps_s / lps_b) if lps_b else 0.0,
            "sets_equal": "PASS" if equal else "FAIL",
        })
    final_equal = sorted(base.m_final) == sorted(symm.m_final)
    all_equal = all_equal and final_equal

    header = (f"{'N':>3} {'LPs base':>9} {'t base':>8} {'LPs symm':>9} "
              f"{'t symm':>8} {'red %':>6}  sets")
    print(header)
    for row in rows:
        print(f"{row['n']:>3} {row['lps_baseline']:>9} "
              f"{row['seconds_baseline']:>8.3f} {row['lps_symmetric']:>9} "
              f"{row['seconds_symmetric']:>8.3f} "
              f"{row['reduction_percent']:>6.1f}  {row['sets_equal']}")
    print(f"final partition ({len(base.m_final)} vs {len(symm.m_final)} "
          f"pieces): {'PASS' if final_equal else 'FAIL'}")
    print(f"solution equality: {'PASS' if all_equal else 'FAIL'}")
    print(f"total wall time: {total:.3f} s")

    out = Path(args.out) if args.out else Path(
        Path(args.problem).stem + "_compare.csv")
    fieldnames = ["n", "lps_baseline", "seconds_baseline", "lps_symmetric",
                  "seconds_symmetric", "reduction_percent", "sets_equal"]
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            formatted = dict(row)
            formatted["seconds_baseline"] = f"{row['seconds_baseline']:.6f}"
            formatted["seconds_symmetric"] = f"{row['seconds_symmetric']:.6f}"
            formatted["reduction_percent"] = f"{row['reduction_percent']:.2f}"
            writer.writerow(formatted)
    fig_path = out.with_suffix(".svg")
    from .plotting import plot_lp_report

    plot_lp_report(rows, fig_path)
    print(f"report: {out} and {fig_path}")
    return 0


def cmd_plot(args) -> int:
    try:
        solution = ExplicitSolution.load(args.solution)
    except _PARSE_ERRORS as exc:
        _fail(EXIT_PARSE, f"cannot read solution file {args.solution}: {exc}")
    out = Path(args.out) if args.out else Path(
        Path(args.solution).stem + ".svg")
    from .plotting import plot_partition

    plot_partition(solution, out)
    print(f"figure: {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symmpc",
        description="explicit solutions of constrained LQ problems, "
                    "exploiting symmetries of the problem data")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="compute an explicit solution")
    p_solve.add_argument("problem", help="problem JSON file")
    p_solve.add_argument("--n", type=int, default=None,
                         help="target horizon (default: value in the file)")
    p_solve.add_argument("--no-symmetry", action="store_true",
                         help="ignore declared symmetries")
    p_solve.add_argument("--orbit-dedup", action="store_true",
                         help="drop same-orbit duplicates during extension")
    p_solve.add_argument("--parallel", action="store_true",
                         help="probe candidates of one tree level in parallel")
    p_solve.add_argument("--trace", default=None, metavar="PATH",
                         help="write one JSON line per tested candidate")
    p_solve.add_argument("--eps-degenerate", type=float,
                         default=EPS_DEGENERATE, metavar="TOL",
                         help="degeneracy threshold on the certificate "
                              "objective (default %(default)s)")
    p_solve.add_argument("--out", default=None, metavar="PATH",
                         help="solution file (default <problem>_solution.json)")
    p_solve.set_defaults(func=cmd_solve)

    p_cmp = sub.add_parser("compare",
                           help="run both modes and report LP counts")
    p_cmp.add_argument("problem", help="problem JSON file")
    p_cmp.add_argument("--n", type=int, default=None,
                       help="target horizon (default: value in the file)")
    p_cmp.add_argument("--out", default=None, metavar="PATH",
                       help="CSV file (default <problem>_compare.csv); the "
                            "figure goes next to it")
    p_cmp.set_defaults(func=cmd_compare)

    p_plot = sub.add_parser("plot", help="draw a planar partition")
    p_plot.add_argument("solution", help="solution JSON file")
    p_plot.add_argument("--out", default=None, metavar="PATH",
                        help="figure file (default <solution>.svg)")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"symmpc: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"symmpc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
