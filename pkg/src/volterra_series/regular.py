"""Taylor coefficients for regular Volterra systems of the second kind.

``x(t) = xi(t) + int_0^t f(t, s, x(s)) ds`` with ``f`` analytic. Substituting
power series and integrating term by term gives a discrete Volterra recursion
for the coefficients ``X_n``; only ``X_0 .. X_{n-1}`` enter ``X_n``.

Forcing coefficients past ``xi.order`` are read as zero, i.e. the stored
table is taken to describe ``xi`` exactly.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from ._validation import check_nonneg_int
from .errors import InvalidArgumentError
from .kernels import LinearKernelExpansion, NonlinearKernelExpansion
from .series import TaylorTable, z_coeff


def _check_dims(kernel, xi: TaylorTable) -> None:
    if kernel.dim != xi.dim:
        raise InvalidArgumentError(f"kernel dimension {kernel.dim} != forcing dimension {xi.dim}")


def solve_linear_second_kind(
    kernel: LinearKernelExpansion, xi: TaylorTable, n_max: int
) -> TaylorTable:
    """Coefficients of the solution of ``x = xi + int_0^t k(t,s) x(s) ds``.

    ``X_n = Xi_n + sum_{l<n} sum_{i<=n-l-1} K_{i,n-i-l-1} X_l / (n - i)``.
    The double sum is run over the stored kernel entries, each of which
    contributes once with ``l = n - i - j - 1``.
    """
    _check_dims(kernel, xi)
    n_max = check_nonneg_int(n_max, "n_max")
    X = np.zeros((n_max + 1, xi.dim))
    entries = list(kernel.entries.items())
    for n in range(n_max + 1):
        acc = xi.coefficient(n).copy()
        for (i, j), mat in entries:
            l = n - i - j - 1
            if l >= 0:
                acc += (mat @ X[l]) / (n - i)
        X[n] = acc
    return TaylorTable(X)


def solve_nonlinear_second_kind(
    kernel: NonlinearKernelExpansion, xi: TaylorTable, n_max: int
) -> TaylorTable:
    """Coefficients of the solution of ``x = xi + int_0^t f(t,s,x(s)) ds``.

    The recursion reads ``Z_k(Y_l)``, the ``t**l`` coefficient of ``x**k``,
    only for multi-indices ``k`` present in the kernel. Each ``Z_k(Y_l)`` is
    final as soon as ``X_l`` is known and is cached from then on.
    """
    _check_dims(kernel, xi)
    n_max = check_nonneg_int(n_max, "n_max")
    dim = xi.dim
    X = np.zeros((n_max + 1, dim))
    powers = sorted(kernel.multi_indices)
    z = {k: np.zeros(n_max + 1) for k in powers}
    entries = list(kernel.entries.items())
    for n in range(n_max + 1):
        acc = xi.coefficient(n).copy()
        for (i, j, k), vec in entries:
            l = n - i - j - 1
            if l >= 0:
                acc += z[k][l] * vec / (n - i)
        X[n] = acc
        prefix = TaylorTable(X[: n + 1])
        for k in powers:
            z[k][n] = z_coeff(k, prefix, n)
    return TaylorTable(X)


def derivative_method_linear(
    kernel: LinearKernelExpansion, xi: TaylorTable, n_max: int
) -> TaylorTable:
    """Taylor coefficients by repeated differentiation of the linear equation.

    Computes ``x^(n)(0) = xi^(n)(0) + sum_{j<n} sum_{r=j}^{n-1} C(r, j)
    D_t^{r-j} k_t^{(n-r-1)}(0, 0) x^(j)(0)`` and returns ``x^(n)(0) / n!``.

    The diagonal derivative splits over the two kernel slots by the binomial
    theorem, with ``d^u/dt^u d^v/ds^v k(0, 0) = u! v! K_uv``. Derivatives are
    carried in scaled form, ``X_j = x^(j)(0) / j!``, with the
    integer factorial ratios formed exactly before conversion to float, so the
    recursion does not overflow for large ``n``.
    """
    _check_dims(kernel, xi)
    n_max = check_nonneg_int(n_max, "n_max")
    X = np.zeros((n_max + 1, xi.dim))
    for n in range(n_max + 1):
        acc = xi.coefficient(n).copy()
        for j in range(n):
            for r in range(j, n):
                p = n - r - 1
                m = r - j
                for a in range(m + 1):
                    mat = kernel.entries.get((a + p, m - a))
                    if mat is None:
                        continue
                    # C(r,j) C(m,a) (a+p)! (m-a)! j! / n!  ==  r! (a+p)! / (a! n!)
                    weight = (factorial(r) * factorial(a + p)) / (factorial(a) * factorial(n))
                    acc += weight * (mat @ X[j])
        X[n] = acc
    return TaylorTable(X)


def derivatives_at_zero(table: TaylorTable) -> np.ndarray:
    """``x^(n)(0) = n! X_n`` for every stored ``n``."""
    scale = np.array([float(factorial(n)) for n in range(table.order + 1)])
    return table.coeffs * scale[:, None]
