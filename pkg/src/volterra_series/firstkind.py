"""Taylor coefficients for linear first-kind systems.

``xi(t) + int_0^t k(t, s) x(s) ds = 0``. Matching the ``t**(n+1)``
coefficient gives ``Xi_{n+1} + sum_{j<=n} KK[n, j] X_{n-j} = 0`` with the
folded kernel ``KK[n, j] = sum_{i<=j} K_{i,j-i} / (n - i + 1)``. When the
leading ``j0`` folded columns vanish the recursion is solved for
``X_{n-j0}`` instead of ``X_n``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ._validation import check_nonneg_int
from .errors import InconsistencyError, InvalidArgumentError, StructureError
from .kernels import LinearKernelExpansion
from .series import TaylorTable

ZERO_TOL = 1e-12
PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class FoldedKernel:
    """``KK[n, j]`` for ``0 <= j <= n <= n_max``; entries with ``j > n`` are zero."""

    n_max: int
    values: np.ndarray  # (n_max + 1, n_max + 1, dim, dim)

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def __getitem__(self, nj: tuple[int, int]) -> np.ndarray:
        return self.values[nj]

    def scale(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))


def fold_kernel(kernel: LinearKernelExpansion, n_max: int) -> FoldedKernel:
    """Fold ``K_ij`` into ``KK[n, j] = sum_{i=0}^{j} K_{i,j-i} / (n - i + 1)``."""
    n_max = check_nonneg_int(n_max, "n_max")
    dim = kernel.dim
    vals = np.zeros((n_max + 1, n_max + 1, dim, dim))
    for (i, jj), mat in kernel.entries.items():
        j = i + jj
        for n in range(j, n_max + 1):
            vals[n, j] += mat / (n - i + 1)
    vals.flags.writeable = False
    return FoldedKernel(n_max, vals)


@dataclass(frozen=True)
class FirstKindSolution:
    """Solution coefficients with the rank-shift diagnostics.

    ``checked_up_to`` is the largest ``n`` for which ``KK[n, j0]`` was
    verified nonsingular; the condition is not checked beyond it.
    """

    table: TaylorTable
    j0: int
    checked_up_to: int


def _is_zero(vec: np.ndarray, scale: float) -> bool:
    return float(np.max(np.abs(vec), initial=0.0)) <= ZERO_TOL * max(1.0, scale)


def solve_first_kind(
    kernel: LinearKernelExpansion, xi: TaylorTable, n_max: int
) -> FirstKindSolution:
    """Coefficients ``X_0 .. X_{n_max}`` of the first-kind solution.

    Raises
    ------
    InconsistencyError
        ``Xi_0 != 0``, or ``Xi_{n+1} != 0`` for some ``n < j0``.
    StructureError
        The kernel is zero, or ``KK[n, j0]`` is numerically singular for
        some needed ``n`` (the first such ``n`` is named).
    """
    if kernel.dim != xi.dim:
        raise InvalidArgumentError(f"kernel dimension {kernel.dim} != forcing dimension {xi.dim}")
    n_max = check_nonneg_int(n_max, "n_max")
    if kernel.is_zero():
        raise StructureError("zero kernel: the first-kind equation has no unique solution")
    xi_scale = float(np.max(np.abs(xi.coeffs)))
    if not _is_zero(xi.coefficient(0), xi_scale):
        raise InconsistencyError(f"no solution: xi(0) = {xi.coefficient(0).tolist()} must vanish")

    top = n_max + kernel.degree
    folded = fold_kernel(kernel, top)
    k_scale = folded.scale()
    j0 = next(
        j
        for j in range(top + 1)
        if not all(_is_zero(folded[n, j], k_scale) for n in range(j, top + 1))
    )
    for n in range(j0):
        if not _is_zero(xi.coefficient(n + 1), xi_scale):
            raise InconsistencyError(
                f"no solution: rank shift j0={j0} requires Xi_{n + 1} = 0, got {xi.coefficient(n + 1).tolist()}"
            )

    dim = kernel.dim
    X = np.zeros((n_max + 1, dim))
    for n in range(j0, n_max + j0 + 1):
        lead = folded[n, j0]
        _check_pivots(lead, n, j0)
        rhs = xi.coefficient(n + 1).copy()
        for j in range(j0 + 1, n + 1):
            rhs += folded[n, j] @ X[n - j]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            X[n - j0] = -lu_solve(lu_factor(lead), rhs)
    return FirstKindSolution(TaylorTable(X), j0, n_max + j0)


def _check_pivots(mat: np.ndarray, n: int, j0: int) -> None:
    norm = float(np.max(np.sum(np.abs(mat), axis=1)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, _ = lu_factor(mat)
    if norm == 0.0 or float(np.min(np.abs(np.diag(lu)))) <= PIVOT_TOL * norm:
        raise StructureError(f"folded kernel KK[{n}, {j0}] is singular; condition fails at n={n}")
