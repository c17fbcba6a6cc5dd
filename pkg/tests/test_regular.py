from __future__ import annotations

import math

import numpy as np
import pytest

from volterra_series import (
    AbelKernelExpansion,
    AlphaExponent,
    InvalidArgumentError,
    LinearKernelExpansion,
    LogKernelExpansion,
    NonlinearKernelExpansion,
    TaylorTable,
    derivative_method_linear,
    derivatives_at_zero,
    evaluate,
    exp_kernel,
    scalar_linear,
    solve_linear_second_kind,
    solve_nonlinear_second_kind,
)

from conftest import random_linear_kernel


class TestKernels:
    def test_zero_entries_dropped(self):
        k = LinearKernelExpansion(1, {(0, 0): [[0.0]], (1, 0): [[2.0]]})
        assert set(k.entries) == {(1, 0)}
        assert k.degree == 1
        assert k.get(5, 5).tolist() == [[0.0]]

    def test_shape_checked(self):
        with pytest.raises(InvalidArgumentError):
            LinearKernelExpansion(2, {(0, 0): [[1.0]]})

    def test_negative_index_rejected(self):
        with pytest.raises(InvalidArgumentError):
            LinearKernelExpansion(1, {(-1, 0): [[1.0]]})

    def test_from_linear_columns(self):
        k = LinearKernelExpansion(2, {(0, 0): [[1.0, 2.0], [3.0, 4.0]]})
        nl = NonlinearKernelExpansion.from_linear(k)
        assert nl.entries[(0, 0, (1, 0))].tolist() == [1.0, 3.0]
        assert nl.entries[(0, 0, (0, 1))].tolist() == [2.0, 4.0]

    def test_singular_parts_must_match(self):
        lin = scalar_linear({(0, 0): 1.0})
        nl = NonlinearKernelExpansion(1, {(0, 0, (2,)): [1.0]})
        with pytest.raises(InvalidArgumentError):
            AbelKernelExpansion(1, AlphaExponent.rational(1, 2), lin, nl)
        with pytest.raises(ValueError):
            LogKernelExpansion(1, "sideways", lin, lin)

    def test_exp_kernel_coefficients(self):
        k = exp_kernel(2.0, -1.0, 3)
        assert k.get(2, 1)[0, 0] == pytest.approx(4.0 / 2 * -1.0)
        assert k.degree == 3


class TestLinearRecursion:
    def test_exponential(self):
        t = solve_linear_second_kind(scalar_linear({(0, 0): 1.0}), TaylorTable.scalar([1.0]), 20)
        assert t.coeffs[:, 0] == pytest.approx([1 / math.factorial(n) for n in range(21)], rel=1e-14)

    def test_cosh(self):
        # x = 1 + int (t - s) x ds  <=>  x'' = x, x(0)=1, x'(0)=0
        t = solve_linear_second_kind(scalar_linear({(1, 0): 1.0, (0, 1): -1.0}), TaylorTable.scalar([1.0]), 16)
        expected = [1 / math.factorial(n) if n % 2 == 0 else 0.0 for n in range(17)]
        assert t.coeffs[:, 0] == pytest.approx(expected, rel=1e-14, abs=1e-300)

    def test_zero_kernel_returns_forcing(self):
        xi = TaylorTable.scalar([1.0, 2.0, 3.0])
        t = solve_linear_second_kind(LinearKernelExpansion(1, {}), xi, 4)
        assert t.coeffs[:, 0].tolist() == [1.0, 2.0, 3.0, 0.0, 0.0]

    def test_system_rotation(self):
        # x = (1, 0) + int J x ds with J a rotation generator: x = (cos t, sin t)
        J = [[0.0, -1.0], [1.0, 0.0]]
        t = solve_linear_second_kind(LinearKernelExpansion(2, {(0, 0): J}), TaylorTable(np.array([[1.0, 0.0]])), 14)
        assert evaluate(t, 0.7) == pytest.approx([math.cos(0.7), math.sin(0.7)], abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            solve_linear_second_kind(scalar_linear({(0, 0): 1.0}), TaylorTable(np.ones((1, 2))), 3)

    def test_matches_nonlinear_embedding(self, rng):
        for _ in range(5):
            k = random_linear_kernel(rng, 2, 3)
            xi = TaylorTable(rng.uniform(-1, 1, (3, 2)))
            a = solve_linear_second_kind(k, xi, 12)
            b = solve_nonlinear_second_kind(NonlinearKernelExpansion.from_linear(k), xi, 12)
            assert np.allclose(a.coeffs, b.coeffs, rtol=1e-13, atol=1e-15)


class TestDerivativeMethod:
    def test_agrees_with_recursion(self, rng):
        for _ in range(10):
            dim = int(rng.integers(1, 3))
            k = random_linear_kernel(rng, dim, 3)
            xi = TaylorTable(rng.uniform(-1, 1, (4, dim)))
            a = solve_linear_second_kind(k, xi, 18).coeffs
            b = derivative_method_linear(k, xi, 18).coeffs
            assert np.allclose(a, b, rtol=1e-11, atol=0)

    def test_large_order_does_not_overflow(self):
        k = exp_kernel(1.0, 1.0, 6)
        t = derivative_method_linear(k, TaylorTable.scalar([1.0]), 60)
        assert np.all(np.isfinite(t.coeffs))

    def test_derivatives_at_zero(self):
        t = solve_linear_second_kind(scalar_linear({(0, 0): 1.0}), TaylorTable.scalar([1.0]), 10)
        assert derivatives_at_zero(t)[:, 0] == pytest.approx(np.ones(11))


class TestNonlinear:
    def test_quadratic_geometric(self):
        k = NonlinearKernelExpansion(1, {(0, 0, (2,)): [1.0]})
        t = solve_nonlinear_second_kind(k, TaylorTable.scalar([1.0]), 15)
        assert t.coeffs[:, 0].tolist() == [1.0] * 16

    def test_riccati_tan(self):
        # x = int (1 + x^2) ds  => x = tan t
        k = NonlinearKernelExpansion(1, {(0, 0, (0,)): [1.0], (0, 0, (2,)): [1.0]})
        t = solve_nonlinear_second_kind(k, TaylorTable.scalar([0.0]), 25)
        assert evaluate(t, 0.3)[0] == pytest.approx(math.tan(0.3), rel=1e-12)

    def test_coupled_product(self):
        # x1 = 1 + int x1 x2, x2 = 1 + int 0: x2 = 1 so x1 = e^t
        k = NonlinearKernelExpansion(2, {(0, 0, (1, 1)): [1.0, 0.0]})
        t = solve_nonlinear_second_kind(k, TaylorTable(np.array([[1.0, 1.0]])), 12)
        assert t.coeffs[:, 0] == pytest.approx([1 / math.factorial(n) for n in range(13)], rel=1e-14)
        assert t.coeffs[1:, 1].tolist() == [0.0] * 12
