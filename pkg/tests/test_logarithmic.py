from __future__ import annotations

import math

import numpy as np
import pytest

from volterra_series import (
    Grid,
    LinearKernelExpansion,
    LogKernelExpansion,
    LogTable,
    LogVariant,
    MomentTable,
    NonlinearKernelExpansion,
    Problem,
    TaylorTable,
    evaluate,
    integral_moment_numeric,
    moment_l,
    moment_m,
    moment_m0_closed,
    moment_m_series,
    residual_check,
    scalar_linear,
    solve_linear_second_kind,
    solve_log_system,
    solve_second_kind_numeric,
)

ONE = LogTable.from_taylor(TaylorTable.scalar([1.0]))
EMPTY = LinearKernelExpansion(1, {})


def log_kernel(variant, a=None, b=None):
    return LogKernelExpansion(1, variant, a or EMPTY, b or EMPTY)


class TestMoments:
    def test_hand_values(self):
        assert moment_l(0, 0) == 1.0
        assert moment_l(2, 3) == pytest.approx(-6 / 81)
        assert moment_m(0, 0) == pytest.approx(-1.0, rel=1e-15)
        assert moment_m(1, 0) == pytest.approx(-0.75, rel=1e-15)
        assert moment_m(0, 1) == pytest.approx(2 - math.pi**2 / 6, rel=1e-14)

    @pytest.mark.parametrize("q", range(0, 12, 3))
    def test_r0_closed_form(self, q):
        assert moment_m(q, 0) == pytest.approx(moment_m0_closed(q), rel=1e-14)

    @pytest.mark.parametrize("q,r", [(0, 1), (1, 2), (4, 3), (10, 5), (0, 6)])
    def test_series_and_quadrature_agree(self, q, r):
        exact = moment_m(q, r)
        # the defining series converges like 1/terms**(r+1)
        assert moment_m_series(q, r, 200000) == pytest.approx(exact, rel=1e-6)
        assert integral_moment_numeric("M", q, r) == pytest.approx(exact, rel=1e-10)
        assert integral_moment_numeric("L", q, r) == pytest.approx(moment_l(q, r), rel=1e-10)

    def test_signs(self):
        for q in range(5):
            for r in range(5):
                assert np.sign(moment_l(q, r)) == (-1) ** r
                assert np.sign(moment_m(q, r)) == -((-1) ** r)

    def test_table_is_read_only(self):
        table = MomentTable(3, 2)
        assert table.M[1, 0] == pytest.approx(-0.75)
        with pytest.raises(ValueError):
            table.L[0, 0] = 2.0


class TestLogSolver:
    def test_t_minus_s_first_column(self):
        # int_0^t ln(t-s) ds = t ln t - t
        kernel = log_kernel(LogVariant.T_MINUS_S, b=scalar_linear({(0, 0): 1.0}))
        sol = solve_log_system(kernel, ONE, 1, 1)
        assert sol.table.coeffs[:, 1, 0].tolist() == pytest.approx([-1.0, 1.0])

    def test_ln_ratio_first_column(self):
        # int_0^t (ln s - ln t) ds = -t
        kernel = log_kernel(LogVariant.LN_RATIO, b=scalar_linear({(0, 0): 1.0}))
        sol = solve_log_system(kernel, ONE, 1, 1)
        assert sol.table.coeffs[:, 1, 0].tolist() == pytest.approx([-1.0, 0.0])

    def test_ln_ratio_is_log_free(self):
        # ln(s/t) x with analytic forcing never creates ln t powers
        kernel = log_kernel(LogVariant.LN_RATIO, a=scalar_linear({(0, 0): 0.5}), b=scalar_linear({(1, 0): 1.0}))
        sol = solve_log_system(kernel, ONE, 12, 3)
        assert not np.any(sol.table.coeffs[1:])
        assert not sol.warnings

    def test_zero_singular_part_reduces_to_regular(self):
        a = scalar_linear({(0, 0): 1.0, (1, 1): -0.5})
        sol = solve_log_system(log_kernel(LogVariant.T_MINUS_S, a=a), ONE, 12, 2)
        reg = solve_linear_second_kind(a, TaylorTable.scalar([1.0]), 12)
        assert sol.table.coeffs[0, :, 0] == pytest.approx(reg.coeffs[:, 0], rel=1e-14)
        assert not np.any(sol.table.coeffs[1:])

    @pytest.mark.parametrize("variant", list(LogVariant))
    def test_residual_small(self, variant):
        kernel = log_kernel(variant, a=scalar_linear({(0, 0): 0.3}), b=scalar_linear({(0, 0): 1.0}))
        sol = solve_log_system(kernel, ONE, 14, 14)
        assert residual_check(Problem(kernel, ONE), sol.table, [0.05, 0.1]) < 1e-10

    def test_nonlinear_against_product_trapezoid(self):
        b = NonlinearKernelExpansion(1, {(0, 0, (2,)): [0.5]})
        kernel = LogKernelExpansion(1, LogVariant.T_MINUS_S, NonlinearKernelExpansion(1, {}), b)
        sol = solve_log_system(kernel, ONE, 20, 20)
        problem = Problem(kernel, ONE)
        assert residual_check(problem, sol.table, [0.05, 0.1]) < 1e-10
        x_num = solve_second_kind_numeric(problem, Grid(0.1, 4096))[-1, 0]
        assert evaluate(sol.table, 0.1)[0] == pytest.approx(x_num, abs=1e-5)

    def test_truncation_recorded(self):
        kernel = log_kernel(LogVariant.T_MINUS_S, b=scalar_linear({(0, 0): 1.0}))
        sol = solve_log_system(kernel, ONE, 4, 1)
        assert sol.warnings and sol.dropped > 0
        assert "r_max=1" in sol.warnings[0]

    def test_forcing_with_log_terms(self):
        # x = t ln t + int 0 ds is returned unchanged
        xi = LogTable.from_entries(1, 1, 1, {(1, 1): [1.0]})
        sol = solve_log_system(log_kernel(LogVariant.T_MINUS_S), xi, 3, 2)
        assert sol.table.coeffs[1, 1, 0] == 1.0
        assert np.count_nonzero(sol.table.coeffs) == 1
