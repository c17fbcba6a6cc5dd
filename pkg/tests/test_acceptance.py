"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import warnings
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, random_linear_kernel  # noqa: E402

from volterra_series import (  # noqa: E402
    AbelKernelExpansion,
    AbelTable,
    AlphaExponent,
    Grid,
    LogKernelExpansion,
    LogTable,
    LogVariant,
    NonlinearKernelExpansion,
    Problem,
    TaylorTable,
    abel_grouped_check,
    abel_grouped_norms,
    derivative_method_linear,
    estimate_radius,
    evaluate,
    abel_closed_form,
    fit_abel_envelope,
    fit_envelope,
    fold_table,
    formal_abel_coefficients,
    integral_moment_numeric,
    majorant_l,
    majorants,
    mittag_leffler_problem,
    moment_l,
    moment_m,
    radius_bound_abel,
    radius_bound_regular,
    residual_check,
    scalar_linear,
    solve_abel_linear_irrational,
    solve_abel_linear_rational_direct,
    solve_abel_linear_rational_fold,
    solve_first_kind,
    solve_linear_second_kind,
    solve_log_system,
    solve_nonlinear_second_kind,
    solve_second_kind_numeric,
)


def _report(number: int, passed: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def _rel(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / np.abs(b)


def criterion_1() -> bool:
    table = solve_linear_second_kind(scalar_linear({(0, 0): 1.0}), TaylorTable.scalar([1.0]), 20)
    exact = [1.0 / math.factorial(n) for n in range(21)]
    err = float(np.max(_rel(table.coeffs[:, 0], exact)))
    return _report(1, err <= 1e-12, f"max relative error of X_n vs 1/n!, n<=20: {err:.2e} (tol 1e-12)")


def criterion_2() -> bool:
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(25):
        dim = int(rng.integers(1, 3))
        kernel = random_linear_kernel(rng, dim, int(rng.integers(0, 4)))
        xi = TaylorTable(rng.uniform(-1, 1, (int(rng.integers(1, 5)), dim)))
        a = solve_linear_second_kind(kernel, xi, 20).coeffs
        b = derivative_method_linear(kernel, xi, 20).coeffs
        both_zero = (a == 0) & (b == 0)
        rel = np.where(both_zero, 0.0, np.abs(a - b) / np.where(b == 0, np.inf, np.abs(b)))
        rel = np.where((b == 0) & (a != 0), np.inf, rel)
        worst = max(worst, float(np.max(rel)))
    return _report(
        2, worst <= 1e-11, f"25 random kernels, derivative vs recursion max elementwise relative {worst:.2e} (tol 1e-11)"
    )


def criterion_3() -> bool:
    kernel = NonlinearKernelExpansion(1, {(0, 0, (2,)): [1.0]})
    table = solve_nonlinear_second_kind(kernel, TaylorTable.scalar([1.0]), 30)
    err = float(np.max(np.abs(table.coeffs[:16, 0] - 1.0)))
    est = estimate_radius(table).radius
    ok = err <= 1e-10 and 0.8 <= est <= 1.2
    return _report(3, ok, f"max |X_n - 1|, n<=15: {err:.2e} (tol 1e-10); estimate_radius {est:.4f} in [0.8, 1.2]")


def criterion_4() -> bool:
    ok = True
    parts = []
    for label, alpha in (("1/2", AlphaExponent.rational(1, 2)), ("1/3", AlphaExponent.rational(1, 3))):
        kernel, xi = mittag_leffler_problem(alpha)
        q, p = alpha.q, alpha.p
        formal = formal_abel_coefficients(kernel, xi, 12, 12)
        ref = abel_closed_form(1.0, alpha, [1.0], 12, 12)
        coef_err = max(
            _coef_err(formal.get(r, n), ref.get(r, n)) for r in range(13) for n in range(13 - r)
        )
        solved = solve_abel_linear_rational_direct(kernel, xi, 12)
        rows = q * 13 // (q - p) + q
        folded_ref = fold_table(abel_closed_form(1.0, alpha, [1.0], rows, rows), 12)
        fold_err = max(
            _coef_err(solved.get(r, n), folded_ref.get(r, n))
            for r in range(q)
            for n in range(13 - r)
            if alpha.admissible(r, n)
        )
        series = solve_abel_linear_rational_direct(kernel, xi, 40)
        x_series = float(evaluate(series, 0.25)[0])
        x_num = float(solve_second_kind_numeric(Problem(kernel, xi), Grid(0.25, 8192))[-1, 0])
        diff = abs(x_series - x_num)
        good = coef_err <= 1e-10 and fold_err <= 1e-10 and diff <= 1e-4
        ok &= good
        parts.append(f"alpha={label}: coeff rel {max(coef_err, fold_err):.1e}, |series-oracle| {diff:.1e}")
    alpha = AlphaExponent.irrational(2**-0.5)
    kernel, xi = mittag_leffler_problem(alpha)
    table = solve_abel_linear_irrational(kernel, xi, 160, 160)
    ref = abel_closed_form(1.0, alpha, [1.0], 160, 160)
    coef_err = max(_coef_err(table.get(r, n), ref.get(r, n)) for r in range(13) for n in range(13 - r))
    x_series = float(evaluate(table, 0.25)[0])
    x_num = float(solve_second_kind_numeric(Problem(kernel, xi), Grid(0.25, 16384))[-1, 0])
    diff = abs(x_series - x_num)
    good = coef_err <= 1e-10 and diff <= 1e-4
    ok &= good
    parts.append(
        f"alpha=2^-1/2: coeff rel {coef_err:.1e}, |series-oracle| {diff:.1e}"
        f" (x={x_series:.6g}, relative {diff / abs(x_num):.1e})"
    )
    return _report(4, ok, "; ".join(parts) + " (tols 1e-10, 1e-4)")


def _coef_err(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if not np.any(b):
        return float(np.max(np.abs(a)))
    return float(np.max(np.abs(a - b) / np.abs(b)))


def criterion_5() -> bool:
    rng = np.random.default_rng(5)
    worst = worst_abs = biggest = 0.0
    for idx in range(10):
        p, q = [(1, 2), (1, 3), (2, 3)][idx % 3]
        alpha = AlphaExponent.rational(p, q)
        dim = int(rng.integers(1, 3))
        kernel = AbelKernelExpansion(
            dim, alpha, random_linear_kernel(rng, dim, 2), random_linear_kernel(rng, dim, 2)
        )
        xi = AbelTable(dim, alpha, 1, 0, {(0, 0): rng.uniform(-1, 1, dim), (0, 1): rng.uniform(-1, 1, dim)})
        direct = solve_abel_linear_rational_direct(kernel, xi, 10).dense(q, 11)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            fold = solve_abel_linear_rational_fold(kernel, xi, 10).table.dense(q, 11)
        diff = np.abs(direct - fold)
        worst = max(worst, float(np.max(diff / np.maximum(1.0, np.abs(direct)))))
        worst_abs = max(worst_abs, float(np.max(diff)))
        biggest = max(biggest, float(np.max(np.abs(direct))))
    return _report(
        5,
        worst_abs <= 1e-9,
        f"10 random problems, max |direct - fold| {worst_abs:.1e} (tol 1e-9) at entries up to {biggest:.1e};"
        f" scaled by max(1, |x|) {worst:.1e}",
    )


def criterion_6() -> bool:
    worst = 0.0
    for q in range(7):
        for r in range(7):
            worst = max(worst, abs(moment_l(q, r) - integral_moment_numeric("L", q, r)))
            worst = max(worst, abs(moment_m(q, r) - integral_moment_numeric("M", q, r)))
    m00 = abs(moment_m(0, 0) + 1.0)
    m01 = abs(moment_m(0, 1) - (2.0 - math.pi**2 / 6.0))
    ok = worst <= 1e-8 and m00 <= 1e-10 and m01 <= 1e-8
    return _report(6, ok, f"max moment deviation {worst:.1e} (tol 1e-8); |M00+1| {m00:.1e}; |M01-(2-pi^2/6)| {m01:.1e}")


def criterion_7() -> bool:
    kernel = LogKernelExpansion(1, LogVariant.T_MINUS_S, scalar_linear({}), scalar_linear({(0, 0): 1.0}))
    xi = LogTable.from_taylor(TaylorTable.scalar([1.0]))
    table = solve_log_system(kernel, xi, 8, 8).table
    x11 = float(table.coeffs[1, 1, 0])
    x01 = float(table.coeffs[0, 1, 0])
    hand = max(abs(x11 - 1.0), abs(x01 + 1.0))
    problem = Problem(kernel, xi)
    ts = (0.05, 0.1, 0.2)
    residuals = [
        residual_check(problem, solve_log_system(kernel, xi, n, n).table, ts) for n in (2, 4, 6, 8)
    ]
    decreasing = all(b < a for a, b in zip(residuals, residuals[1:]))
    ok = hand <= 1e-12 and residuals[-1] <= 1e-3 and decreasing
    return _report(
        7,
        ok,
        f"X11={x11!r}, X01={x01!r}; residuals n_max=2,4,6,8: "
        + ", ".join(f"{r:.1e}" for r in residuals)
        + " (tol 1e-3, decreasing)",
    )


def criterion_8() -> bool:
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        dim = int(rng.integers(1, 3))
        kernel = random_linear_kernel(rng, dim, int(rng.integers(0, 4)), boost_k00=True)
        deg = int(rng.integers(0, 9))
        X = rng.uniform(-1, 1, (deg + 1, dim))
        Xi = np.zeros((deg + kernel.degree + 2, dim))
        # int_0^t t^i s^j s^l ds = t^(i+j+l+1) / (j+l+1)
        for (i, j), mat in kernel.entries.items():
            for l in range(deg + 1):
                Xi[i + j + l + 1] -= mat @ X[l] / (j + l + 1)
        got = solve_first_kind(kernel, TaylorTable(Xi), 12).table.coeffs
        ref = np.zeros_like(got)
        ref[: deg + 1] = X
        worst = max(worst, float(np.max(np.abs(got - ref))))
    shift = solve_first_kind(scalar_linear({(1, 0): 1.0, (0, 1): -1.0}), TaylorTable.scalar([0, 0, -0.5]), 10)
    expected = np.zeros(11)
    expected[0] = 1.0
    shift_err = float(np.max(np.abs(shift.table.coeffs[:, 0] - expected)))
    ok = worst <= 1e-10 and shift.j0 == 1 and shift_err <= 1e-10
    return _report(
        8, ok, f"20 round trips max error {worst:.1e} (tol 1e-10); rank shift j0={shift.j0}, |x-1| {shift_err:.1e}"
    )


def criterion_9() -> bool:
    rng = np.random.default_rng(9)
    sound = dominated = True
    worst_ratio = 0.0
    for _ in range(20):
        dim = int(rng.integers(1, 3))
        kernel = random_linear_kernel(rng, dim, int(rng.integers(0, 4)))
        rho = float(rng.uniform(0.3, 3.0))
        n = 40
        xi = TaylorTable(np.outer(rho ** -np.arange(n + 1.0), rng.uniform(0.5, 1.0, dim)))
        table = solve_linear_second_kind(kernel, xi, n)
        data = majorants(kernel, xi, n)
        env = fit_envelope(data.norm_xi, majorant_l(kernel, max(n, kernel.degree + 1)))
        bound = radius_bound_regular(env)
        est = estimate_radius(table).radius
        sound &= bound <= 1.1 * est
        worst_ratio = max(worst_ratio, bound / est)
        norms = np.max(np.abs(table.coeffs[:21]), axis=1)
        dominated &= bool(np.all(norms <= data.C[:21] * (1 + 1e-12)))
    return _report(
        9,
        sound and dominated,
        f"20 problems: max bound/estimate {worst_ratio:.3f} (<= 1.1); ||X_n|| <= C_n for n<=20: {dominated}",
    )


def criterion_10() -> bool:
    alpha = AlphaExponent.rational(1, 2)
    kernel, xi = mittag_leffler_problem(alpha)
    check = abel_grouped_check(kernel, xi, 0.1, 15)
    L, M = majorant_l(kernel, 15)
    env = fit_abel_envelope(abel_grouped_norms(xi, 0.1, 15), L, M, 0.1)
    bound = radius_bound_abel(env, alpha)
    ok = check.holds and bound > 0
    slack = float(np.min(check.rhs - check.lhs))
    return _report(10, ok, f"grouped inequality n<=15 holds: {check.holds} (min slack {slack:.2e}); bound {bound:.4f} > 0")


def test_criterion_1_exponential_recursion():
    assert criterion_1()


def test_criterion_2_cross_method_identity():
    assert criterion_2()


def test_criterion_3_nonlinear_geometric():
    assert criterion_3()


def test_criterion_4_mittag_leffler_reproduction():
    assert criterion_4()


def test_criterion_5_rational_method_equivalence():
    assert criterion_5()


def test_criterion_6_moment_integrals():
    assert criterion_6()


def test_criterion_7_log_solver_hand_check():
    assert criterion_7()


def test_criterion_8_first_kind_round_trip():
    assert criterion_8()


def test_criterion_9_radius_bound_soundness():
    assert criterion_9()


def test_criterion_10_abel_grouped_inequality():
    assert criterion_10()


if __name__ == "__main__":
    results = [globals()[f"criterion_{n}"]() for n in range(1, 11)]
    sys.exit(0 if all(results) else 1)
