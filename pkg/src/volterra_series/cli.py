"""Command line front end: ``volterra-series solve|eval|validate|radius FILE``.

Exit codes: 0 success, 1 a validation check failed, 2 bad input,
3 the solver rejected the problem structure, 4 evaluation outside the domain.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .abel import abel_closed_form, fold_table, solve_abel_linear_rational_fold
from .convergence import (
    abel_grouped_norms,
    fit_abel_envelope,
    fit_envelope,
    majorant_l,
    radius_bound_abel,
    radius_bound_regular,
    vector_norm,
)
from .errors import (
    DomainError,
    InconsistencyError,
    InvalidArgumentError,
    ProblemFormatError,
    StepFailureError,
    StructureError,
    UnsupportedError,
)
from .problem import Problem, load_problem, solve_problem
from .quadrature import Grid, residual_check, solve_second_kind_numeric
from .regular import derivative_method_linear, solve_linear_second_kind
from .series import AbelTable, LogTable, Series, TaylorTable, estimate_radius, evaluate

log = logging.getLogger("volterra_series")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_STRUCTURE, EXIT_DOMAIN = 0, 1, 2, 3, 4

RESIDUAL_TOL = {"none": 1e-6, "abel": 1e-4, "log": 1e-3}
CLOSED_FORM_TOL = 1e-10
CROSS_METHOD_TOL = 1e-9
REDUCTION_TOL = 1e-12
CORRUPTION = 0.1


# -- table output ----------------------------------------------------------------


def table_rows(table: Series) -> list[tuple[int, int, str, int, float]]:
    """``(r, i, exponent, component, value)`` rows in a fixed order."""
    rows = []
    if isinstance(table, TaylorTable):
        for i in range(table.order + 1):
            for c in range(table.dim):
                rows.append((0, i, str(i), c, float(table.coeffs[i, c])))
    elif isinstance(table, AbelTable):
        alpha = table.alpha
        for r in range(table.rmax + 1):
            for i in range(table.order + 1):
                if alpha.admissible(r, i):
                    vec = table.get(r, i)
                    for c in range(table.dim):
                        rows.append((r, i, alpha.display(r, i), c, float(vec[c])))
    else:
        for r in range(table.rmax + 1):
            for i in range(table.order + 1):
                for c in range(table.dim):
                    rows.append((r, i, f"ln(t)^{r}*t^{i}", c, float(table.coeffs[r, i, c])))
    return rows


def _fmt(value: float) -> str:
    return format(value + 0.0, ".17g")


def format_table(table: Series, output: str) -> str:
    rows = table_rows(table)
    if output == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "i", "exponent", "component", "value"])
        for r, i, e, c, v in rows:
            writer.writerow([r, i, e, c, _fmt(v)])
        return buf.getvalue()
    width = max([len("exponent")] + [len(e) for _, _, e, _, _ in rows])
    lines = [f"{'r':>4} {'i':>4} {'exponent':>{width}} {'comp':>4}  value"]
    lines += [f"{r:>4} {i:>4} {e:>{width}} {c:>4}  {v: .15e}" for r, i, e, c, v in rows]
    return "\n".join(lines) + "\n"


# -- validation --------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.3e} (tol {self.tol:.0e})"


def corrupt(table: Series, amount: float = CORRUPTION) -> Series:
    """Add ``amount`` to every component of the ``t**1`` coefficient."""
    if isinstance(table, TaylorTable):
        arr = np.array(table.coeffs)
        if arr.shape[0] < 2:
            arr = np.vstack([arr, np.zeros((1, table.dim))])
        arr[1] += amount
        return TaylorTable(arr)
    if isinstance(table, AbelTable):
        coeffs = dict(table.coeffs)
        coeffs[(0, 1)] = table.get(0, 1) + amount
        return AbelTable(table.dim, table.alpha, max(table.order, 1), table.rmax, coeffs, table.folded)
    arr = np.array(table.coeffs)
    if arr.shape[1] < 2:
        arr = np.concatenate([arr, np.zeros((arr.shape[0], 1, arr.shape[2]))], axis=1)
    arr[0, 1] += amount
    return LogTable(arr)


def _has_closed_form(problem: Problem) -> bool:
    k = problem.kernel
    return (
        problem.singularity == "abel"
        and problem.dim == 1
        and k.is_linear
        and k.a.is_zero()
        and set(k.b.entries) == {(0, 0)}
        and all(r == 0 for r, _ in problem.xi.coeffs)
    )


def _closed_form_check(problem: Problem, table: AbelTable) -> Check:
    kernel, alpha = problem.kernel, problem.kernel.alpha
    c = float(kernel.b.entries[(0, 0)][0, 0])
    xi0 = [float(problem.xi.get(0, i)[0]) for i in range(problem.xi.order + 1)]
    deg = len(xi0) - 1
    if alpha.is_rational:
        p, q = alpha.p, alpha.q
        rows = q * (table.order + 1) // (q - p) + q
        ref = fold_table(abel_closed_form(c, alpha, xi0, rows + deg, rows), table.order)
    else:
        ref = abel_closed_form(c, alpha, xi0, table.order, table.rmax)
    worst = 0.0
    for r in range(table.rmax + 1):
        for i in range(table.order + 1):
            if alpha.admissible(r, i):
                a, b = table.get(r, i), ref.get(r, i)
                worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))))
    return Check("closed-form coefficients (relative)", worst, CLOSED_FORM_TOL)


def _rel_diff(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)), initial=0.0))


def run_checks(
    problem: Problem,
    table: Series,
    t_points: Sequence[float],
    grid_steps: int,
) -> list[Check]:
    """All oracles that apply to ``problem``, run against ``table``."""
    tol = RESIDUAL_TOL[problem.singularity]
    checks = [Check("quadrature residual", residual_check(problem, table, t_points), tol)]
    if problem.kind == "second-kind":
        t_end = max(t_points)
        x_num = solve_second_kind_numeric(problem, Grid(t_end, grid_steps))[-1]
        checks.append(
            Check(
                f"product-integration oracle at t={t_end:g} (relative)",
                _rel_diff(evaluate(table, t_end), x_num),
                tol,
            )
        )
    if problem.singularity == "none" and problem.kind == "second-kind" and problem.is_linear:
        other = derivative_method_linear(problem.kernel, problem.xi, problem.n_max)
        checks.append(
            Check("derivative method agreement (relative)", _rel_diff(table.coeffs, other.coeffs), CROSS_METHOD_TOL)
        )
    if problem.singularity == "abel":
        kernel = problem.kernel
        if _has_closed_form(problem):
            checks.append(_closed_form_check(problem, table))
        if kernel.alpha.is_rational and kernel.is_linear:
            fold = solve_abel_linear_rational_fold(kernel, problem.xi, problem.n_max, problem.m_max)
            a = table.dense(kernel.alpha.q, problem.n_max + 1)
            b = fold.table.dense(kernel.alpha.q, problem.n_max + 1)
            checks.append(Check("direct vs fold method (relative)", _rel_diff(a, b), CROSS_METHOD_TOL))
        if kernel.is_linear and kernel.b.is_zero() and all(r == 0 for r, _ in problem.xi.coeffs):
            xi_row = problem.xi.row(0)
            reg = solve_linear_second_kind(kernel.a, xi_row, table.order)
            a = table.dense(table.rmax + 1, table.order + 1)
            b = np.zeros_like(a)
            b[0] = reg.coeffs
            checks.append(Check("reduction to regular solver", _rel_diff(a, b), REDUCTION_TOL))
    return checks


# -- commands ----------------------------------------------------------------------


def _load(args) -> Problem:
    problem = load_problem(args.file)
    if getattr(args, "nmax", None) is not None or getattr(args, "rmax", None) is not None:
        problem = problem.with_truncation(args.nmax, args.rmax)
    return problem


def cmd_solve(args) -> int:
    problem = _load(args)
    sol = solve_problem(problem)
    for key, value in sol.diagnostics.items():
        log.info("%s = %s", key, value)
    sys.stdout.write(format_table(sol.table, args.output))
    return EXIT_OK


def cmd_eval(args) -> int:
    problem = _load(args)
    table = solve_problem(problem).table
    rows = []
    for t in args.t:
        value = evaluate(table, t)
        rows += [(t, c, float(v)) for c, v in enumerate(value)]
    if args.output == "csv":
        out = ["t,component,value"] + [f"{_fmt(t)},{c},{_fmt(v)}" for t, c, v in rows]
    else:
        out = [f"x({t:g})[{c}] = {v:.15g}" for t, c, v in rows]
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    problem = _load(args)
    table = solve_problem(problem).table
    if args.corrupt:
        table = corrupt(table)
    t_points = list(args.tpoints) if args.tpoints else list(problem.t_points)
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        t_points += [float(t) for t in rng.uniform(0.1, 1.0, 3) * max(t_points)]
    grid_steps = args.grid_steps or problem.grid_steps
    checks = run_checks(problem, table, t_points, grid_steps)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_radius(args) -> int:
    problem = _load(args)
    table = solve_problem(problem).table
    n = problem.n_max
    kernel = problem.kernel
    lines = []
    if problem.kind == "second-kind" and problem.singularity == "none" and problem.is_linear:
        L = majorant_l(kernel, max(n, kernel.degree + 1))
        norm_xi = [vector_norm(problem.xi.coefficient(i)) for i in range(max(n, problem.xi.order) + 1)]
        env = fit_envelope(norm_xi, L)
        lines.append(f"certified_bound: {radius_bound_regular(env):.15g}")
        lines.append(f"envelope: R={env.R:.15g} M0={env.M0:.15g} M={env.M:.15g}")
    elif problem.singularity == "abel" and kernel.is_linear and kernel.alpha.is_rational:
        degree = max(kernel.a.degree, kernel.b.degree) + 1
        L, M = majorant_l(kernel, max(n, degree))
        grouped_xi = abel_grouped_norms(problem.xi, args.delta, max(n, problem.xi.order))
        env = fit_abel_envelope(grouped_xi, L, M, args.delta)
        bound = radius_bound_abel(env, kernel.alpha)
        lines.append(f"certified_bound: {bound:.15g} (grouped series, valid for t >= delta={args.delta:g})")
        if bound <= args.delta:
            lines.append("note: bound <= delta, so the certified interval [delta, bound) is empty")
        lines.append(
            f"envelope: R={env.R:.15g} C0={env.C0:.15g} C_L={env.C_L:.15g} "
            f"C_M={env.C_M:.15g} C_delta={env.c_delta(kernel.alpha):.15g}"
        )
    else:
        lines.append("certified_bound: none (no bound for this problem class)")
    if isinstance(table, TaylorTable):
        est = estimate_radius(table)
    elif isinstance(table, AbelTable) and table.alpha.is_rational:
        est = estimate_radius(TaylorTable(abel_grouped_norms(table, args.delta)[:, None]))
    else:
        est = None
    if est is None:
        lines.append("empirical_estimate: none")
    else:
        flag = " (low confidence)" if est.low_confidence else ""
        lines.append(f"empirical_estimate: {est.radius:.15g}{flag} [{est.note}]")
    print("\n".join(lines))
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volterra-series",
        description="Generalized power series solutions of Volterra integral equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="JSON problem file")
        p.add_argument("--nmax", type=int, help="override truncation.n_max")
        p.add_argument("--rmax", type=int, help="override truncation.r_max")
        p.add_argument("--output", choices=("csv", "pretty"), default="csv")

    p = sub.add_parser("solve", help="print the coefficient table")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="evaluate the truncated series")
    common(p)
    p.add_argument("t", type=float, nargs="+", help="evaluation points")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("validate", help="run the applicable oracles")
    common(p)
    p.add_argument("--tpoints", type=float, nargs="+", help="residual points (default from file)")
    p.add_argument("--grid-steps", type=int, help="time-stepping grid size (default from file)")
    p.add_argument("--seed", type=int, help="add three random residual points drawn with this seed")
    p.add_argument("--corrupt", action="store_true", help=f"add {CORRUPTION} to X_1 before checking")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("radius", help="certified radius bound and empirical estimate")
    common(p)
    p.add_argument("--delta", type=float, default=0.1, help="grouping threshold for Abel bounds")
    p.set_defaults(func=cmd_radius)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("VOLTERRA_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    if getattr(args, "grid_steps", None) is not None and args.grid_steps < 4:
        print("error: --grid-steps must be at least 4", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "delta", 1.0) <= 0 or not math.isfinite(getattr(args, "delta", 1.0)):
        print("error: --delta must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (ProblemFormatError, InvalidArgumentError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StructureError, InconsistencyError, UnsupportedError, StepFailureError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
