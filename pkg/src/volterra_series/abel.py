"""Generalized series solutions for kernels with an Abel factor.

The equation is ``x = xi + int_0^t [a(t,s,x) + (t-s)**(-alpha) b(t,s,x)] ds``
and the solution is sought as ``sum_{r,i} t**(i - r*alpha) X_{r,i}``. Two
integrals drive everything::

    int_0^t t^i s^j s^(l - r alpha) ds
        = t^(i+j+l+1 - r alpha) / (j + l + 1 - r alpha)
    int_0^t (t-s)^(-alpha) t^i s^j s^(l - r alpha) ds
        = B(1 - alpha, j + l + 1 - r alpha) t^(i+j+l+1 - (r+1) alpha)

The regular part keeps the row index ``r``, the singular part raises it by
one. For irrational ``alpha`` every pair ``(r, i)`` is a distinct exponent.
For ``alpha = p/q`` row ``q`` lands back on row 0 shifted by ``p``; the fold
method computes the formal (irrational-style) coefficients ``W_{r,i}`` and
sums ``X_{rho,n} = sum_m W_{rho+mq, n+mp}``, the direct method keeps rows
``0 .. q-1`` and feeds row ``q-1`` back into row 0.
"""

from __future__ import annotations

import logging
import math
import warnings
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import check_nonneg_int
from .errors import DomainError, InvalidArgumentError, UnsupportedError
from .kernels import AbelKernelExpansion, LinearKernelExpansion
from .series import AbelTable, AlphaExponent

log = logging.getLogger(__name__)

FOLD_TOL = 1e-14
FOLD_PATIENCE = 2


class FoldTruncationWarning(RuntimeWarning):
    """The fold sums were cut at ``m_max`` before their increments vanished."""


def beta_fn(mu: float, nu: float) -> float:
    """``B(mu, nu) = Gamma(mu) Gamma(nu) / Gamma(mu + nu)`` for positive arguments."""
    mu, nu = float(mu), float(nu)
    if not (mu > 0 and nu > 0):
        raise DomainError(f"beta function needs positive arguments, got ({mu}, {nu})")
    if mu + nu < 170.0:
        return math.gamma(mu) * math.gamma(nu) / math.gamma(mu + nu)
    return math.exp(math.lgamma(mu) + math.lgamma(nu) - math.lgamma(mu + nu))


def _check_xi(kernel: AbelKernelExpansion, xi: AbelTable) -> None:
    if kernel.dim != xi.dim:
        raise InvalidArgumentError(f"kernel dimension {kernel.dim} != forcing dimension {xi.dim}")
    if kernel.alpha != xi.alpha:
        raise InvalidArgumentError(f"kernel alpha {kernel.alpha} != forcing alpha {xi.alpha}")


class _LazyPower:
    """Coefficients of ``prod_j W_j**k_j`` filled on demand.

    Level ``m`` holds the product of the first ``m + 1`` factors. Entry
    ``(rho, l)`` of a level only reads the box ``[0..rho] x [0..l]`` of the
    level below and of ``W``, so once that box of ``W`` is final the entry is
    computed exactly once.
    """

    def __init__(self, sweep: "_FormalSweep", k: Sequence[int]):
        self.sweep = sweep
        self.factors = [j for j, kj in enumerate(k) for _ in range(kj)]
        self.levels = [np.zeros((0, 0)) for _ in self.factors]
        self.done = [np.zeros((0, 0), dtype=bool) for _ in self.factors]

    def value(self, rho: int, l: int) -> float:
        top = len(self.factors) - 1
        if top == 0:
            return float(self.sweep.W[rho, l, self.factors[0]])
        self._fill(top, rho, l)
        return float(self.levels[top][rho, l])

    def _grow(self, m: int, rho: int, l: int) -> None:
        R, C = self.levels[m].shape
        if rho < R and l < C:
            return
        shape = (max(rho + 1, 2 * R), max(l + 1, 2 * C))
        for store, dtype in ((self.levels, float), (self.done, bool)):
            bigger = np.zeros(shape, dtype=dtype)
            bigger[:R, :C] = store[m]
            store[m] = bigger

    def _fill(self, m: int, rho: int, l: int) -> None:
        if m == 0:
            return
        self._grow(m, rho, l)
        todo = np.argwhere(~self.done[m][: rho + 1, : l + 1])
        if not len(todo):
            return
        self._fill(m - 1, rho, l)
        W = self.sweep.W
        f = self.factors[m]
        below = self.levels[m - 1] if m > 1 else W[:, :, self.factors[0]]
        level = self.levels[m]
        for a, b in todo:
            level[a, b] = np.sum(below[: a + 1, : b + 1] * W[a::-1, b::-1, f])
        self.done[m][: rho + 1, : l + 1] = True


class _FormalSweep:
    """Row-major evaluation of the formal coefficients ``W_{r,i}``.

    ``W_{r,n}`` needs row ``r`` up to ``n-1`` and row ``r-1`` up to ``n-1``
    (and, for nonlinear kernels, rows ``<= r`` up to ``n-1``), so extending
    every row to a common column bound in increasing ``r`` keeps all inputs
    final. Arrays grow on demand.
    """

    def __init__(self, kernel: AbelKernelExpansion, xi: AbelTable, check_bounds: bool = False):
        _check_xi(kernel, xi)
        self.kernel = kernel
        self.alpha = kernel.alpha
        self.dim = kernel.dim
        self.xi = xi
        self.linear = kernel.is_linear
        self.a_entries = list(kernel.a.entries.items())
        self.b_entries = list(kernel.b.entries.items())
        self.one_minus_alpha = 1.0 - self.alpha.value
        self.W = np.zeros((0, 0, self.dim))
        self.extent: list[int] = []  # last computed column per row
        self._z: dict[tuple, _LazyPower] = {}
        self.check_bounds = check_bounds and self.alpha.is_rational
        if self.check_bounds:
            self._beta_cap = beta_fn(self.one_minus_alpha, 1.0 / self.alpha.q)

    def _grow(self, rows: int, cols: int) -> None:
        R, C = self.W.shape[:2]
        if rows <= R and cols <= C:
            return
        bigger = np.zeros((max(rows, R), max(cols, C), self.dim))
        bigger[:R, :C] = self.W
        self.W = bigger

    def ensure(self, r_hi: int, c_hi: int) -> None:
        self._grow(r_hi + 1, c_hi + 1)
        while len(self.extent) < r_hi + 1:
            self.extent.append(-1)
        for r in range(r_hi + 1):
            for n in range(self.extent[r] + 1, c_hi + 1):
                self.W[r, n] = self._coefficient(r, n)
            self.extent[r] = max(self.extent[r], c_hi)

    def _z_coeff(self, k: tuple, rho: int, l: int) -> float:
        if not any(k):
            return 1.0 if (rho == 0 and l == 0) else 0.0
        power = self._z.get(k)
        if power is None:
            power = self._z[k] = _LazyPower(self, k)
        return power.value(rho, l)

    def _weight_cap_check(self, a_denom: float | None, beta_arg: float | None) -> None:
        q = self.alpha.q
        if a_denom is not None and 1.0 / a_denom > q * (1 + 1e-12):
            raise AssertionError(f"1/(n-i-r*alpha) = {1.0 / a_denom} exceeds q = {q}")
        if beta_arg is not None:
            value = beta_fn(self.one_minus_alpha, beta_arg)
            if value > self._beta_cap * (1 + 1e-12):
                raise AssertionError(f"B(1-alpha, {beta_arg}) = {value} exceeds B(1-alpha, 1/q)")

    def _coefficient(self, r: int, n: int) -> np.ndarray:
        alpha = self.alpha
        if not alpha.admissible(r, n):
            return np.zeros(self.dim)
        acc = self.xi.get(r, n).copy()
        for key, coef in self.a_entries:
            i, j = key[0], key[1]
            l = n - i - j - 1
            if l < 0 or not alpha.admissible(r, l):
                continue
            denom = alpha.exponent(r, n - i)  # n - i - r alpha
            if self.check_bounds:
                self._weight_cap_check(denom, None)
            if self.linear:
                acc += (coef @ self.W[r, l]) / denom
            else:
                acc += self._z_coeff(key[2], r, l) * coef / denom
        if r >= 1:
            for key, coef in self.b_entries:
                i, j = key[0], key[1]
                l = n - i - j - 1
                if l < 0 or not alpha.admissible(r - 1, l):
                    continue
                arg = alpha.exponent(r - 1, n - i)  # n - i - (r-1) alpha
                if self.check_bounds:
                    self._weight_cap_check(None, arg)
                weight = beta_fn(self.one_minus_alpha, arg)
                if self.linear:
                    acc += weight * (coef @ self.W[r - 1, l])
                else:
                    acc += weight * self._z_coeff(key[2], r - 1, l) * coef
        return acc


def formal_abel_coefficients(
    kernel: AbelKernelExpansion,
    xi: AbelTable,
    n_max: int,
    r_max: int,
    check_bounds: bool = False,
) -> AbelTable:
    """Formal coefficients ``W_{r,i}``, ``r <= r_max``, ``i <= n_max``.

    This is the irrational-exponent recursion run with whatever ``alpha`` the
    kernel carries. For rational ``alpha`` the result is unfolded: rows past
    ``q - 1`` are kept and exponents repeat. ``check_bounds`` asserts the
    rational-exponent weight caps ``1/(n-i-r alpha) <= q`` and
    ``B(1-alpha, n-i-r alpha) <= B(1-alpha, 1/q)`` at every use.
    """
    n_max = check_nonneg_int(n_max, "n_max")
    r_max = check_nonneg_int(r_max, "r_max")
    sweep = _FormalSweep(kernel, xi, check_bounds=check_bounds)
    sweep.ensure(r_max, n_max)
    return AbelTable.from_dense(sweep.W, kernel.alpha, n_max, r_max, folded=False)


def solve_abel_linear_irrational(
    kernel: AbelKernelExpansion, xi: AbelTable, n_max: int, r_max: int
) -> AbelTable:
    """Linear Abel system with an irrational exponent.

    ``X_{r,n} = Xi_{r,n} + sum 1/(n-i-r alpha) A_{i,n-i-l-1} X_{r,l}
    + [r >= 1] sum B(1-alpha, n-i-(r-1) alpha) B_{i,n-i-l-1} X_{r-1,l}``,
    a discrete Volterra recursion in ``n`` and a first-order difference
    equation in ``r``.
    """
    if kernel.alpha.is_rational:
        raise UnsupportedError("rational alpha: use the rational direct or fold solvers")
    if not kernel.is_linear:
        raise InvalidArgumentError("linear solver given a nonlinear kernel")
    table = formal_abel_coefficients(kernel, xi, n_max, r_max)
    return AbelTable(table.dim, table.alpha, table.order, table.rmax, table.coeffs)


def _check_rational(kernel: AbelKernelExpansion) -> AlphaExponent:
    if not kernel.alpha.is_rational:
        raise UnsupportedError("irrational alpha: use solve_abel_linear_irrational")
    return kernel.alpha


def solve_abel_linear_rational_direct(
    kernel: AbelKernelExpansion, xi: AbelTable, n_max: int
) -> AbelTable:
    """Linear Abel system with ``alpha = p/q`` on rows ``0 .. q-1`` directly.

    The singular part acting on row ``q-1`` produces integer exponents: its
    ``t**(n - 0*alpha)`` contribution reads ``X_{q-1,l}`` for ``l`` up to
    ``n + p - 1`` with weight ``B(1-alpha, n + p - i - (q-1) alpha)``. That
    is not recursive in ``n`` alone, but every input has a strictly smaller
    exponent, so coefficients are computed in increasing exponent order. Rows
    are carried internally up to exponent ``n_max`` and the result is cut
    to ``i <= n_max``.
    """
    alpha = _check_rational(kernel)
    if not kernel.is_linear:
        raise InvalidArgumentError("linear solver given a nonlinear kernel")
    _check_xi(kernel, xi)
    n_max = check_nonneg_int(n_max, "n_max")
    p, q = alpha.p, alpha.q
    dim = kernel.dim
    col_hi = [(n_max * q + rho * p) // q for rho in range(q)]
    X = np.zeros((q, max(col_hi) + 1, dim))
    order = [
        (rho, n)
        for rho in range(q)
        for n in range(col_hi[rho] + 1)
        if alpha.admissible(rho, n)
    ]
    order.sort(key=lambda rn: alpha.exponent_key(*rn))
    one_minus_alpha = 1.0 - alpha.value
    a_entries = list(kernel.a.entries.items())
    b_entries = list(kernel.b.entries.items())
    for rho, n in order:
        acc = xi.get(rho, n).copy()
        for (i, j), mat in a_entries:
            l = n - i - j - 1
            if l >= 0 and alpha.admissible(rho, l):
                acc += (mat @ X[rho, l]) / alpha.exponent(rho, n - i)
        if rho >= 1:
            for (i, j), mat in b_entries:
                l = n - i - j - 1
                if l >= 0 and alpha.admissible(rho - 1, l):
                    weight = beta_fn(one_minus_alpha, alpha.exponent(rho - 1, n - i))
                    acc += weight * (mat @ X[rho - 1, l])
        else:
            for (i, j), mat in b_entries:
                l = n + p - i - j - 1
                if l >= 0 and alpha.admissible(q - 1, l):
                    weight = beta_fn(one_minus_alpha, alpha.exponent(q - 1, n + p - i))
                    acc += weight * (mat @ X[q - 1, l])
        X[rho, n] = acc
    return AbelTable.from_dense(X, alpha, n_max, q - 1)


class FoldResult(NamedTuple):
    table: AbelTable
    terms: int
    """Number of fold terms ``m = 0 .. terms - 1`` summed."""
    last_increment: float
    converged: bool


def _fold_sweep(
    sweep: _FormalSweep, alpha: AlphaExponent, n_max: int, m_max: int, tol: float
) -> FoldResult:
    p, q = alpha.p, alpha.q
    dim = sweep.dim
    X = np.zeros((q, n_max + 1, dim))
    mask = np.array(
        [[alpha.admissible(rho, n) for n in range(n_max + 1)] for rho in range(q)]
    )[:, :, None]
    quiet = 0
    increment = math.inf
    m = 0
    for m in range(m_max + 1):
        sweep.ensure((m + 1) * q - 1, n_max + m * p)
        term = sweep.W[m * q : (m + 1) * q, m * p : m * p + n_max + 1] * mask
        X += term
        increment = float(np.max(np.abs(term))) if term.size else 0.0
        scale = max(1.0, float(np.max(np.abs(X))))
        quiet = quiet + 1 if increment <= tol * scale else 0
        if m >= 1 and quiet >= FOLD_PATIENCE:
            break
    converged = quiet >= FOLD_PATIENCE
    if not converged:
        warnings.warn(
            f"fold truncated at m_max={m_max}; last increment {increment:.3e}",
            FoldTruncationWarning,
            stacklevel=3,
        )
    log.debug("fold used %d terms, last increment %.3e", m + 1, increment)
    table = AbelTable.from_dense(X, alpha, n_max, q - 1)
    return FoldResult(table, m + 1, increment, converged)


def solve_abel_linear_rational_fold(
    kernel: AbelKernelExpansion,
    xi: AbelTable,
    n_max: int,
    m_max: int = 64,
    tol: float = FOLD_TOL,
) -> FoldResult:
    """Linear Abel system with ``alpha = p/q`` via formal coefficients and a fold.

    Runs the irrational-form recursion with the rational exponent, then sums
    ``X_{rho,n} = sum_{m=0}^{m_max} W_{rho+mq, n+mp}``. Summation stops once
    the largest increment has stayed below ``tol * max(1, max|X|)`` for two
    consecutive ``m``; hitting ``m_max`` first emits
    :class:`FoldTruncationWarning`.
    """
    alpha = _check_rational(kernel)
    if not kernel.is_linear:
        raise InvalidArgumentError("linear solver given a nonlinear kernel")
    n_max = check_nonneg_int(n_max, "n_max")
    m_max = check_nonneg_int(m_max, "m_max")
    return _fold_sweep(_FormalSweep(kernel, xi), alpha, n_max, m_max, tol)


def solve_abel_nonlinear(
    kernel: AbelKernelExpansion,
    xi: AbelTable,
    n_max: int,
    r_max: int | None = None,
    m_max: int = 64,
    tol: float = FOLD_TOL,
) -> AbelTable:
    """Nonlinear Abel system.

    Irrational ``alpha``: rows ``0 .. r_max`` of the recursion with
    ``Z_k(Y_{rho,l})``, the ``t**(l - rho alpha)`` coefficient of ``x**k``.
    Rational ``alpha``: the same recursion run formally and folded, with the
    stopping rule of :func:`solve_abel_linear_rational_fold`.

    Only terms with ``l > rho*alpha - 1`` enter the regular part (and
    ``l > (rho-1)*alpha - 1`` the singular part), which are exactly the
    integrable ones.
    """
    nonlinear = kernel.as_nonlinear()
    n_max = check_nonneg_int(n_max, "n_max")
    if kernel.alpha.is_rational:
        return _fold_sweep(_FormalSweep(nonlinear, xi), kernel.alpha, n_max, m_max, tol).table
    if r_max is None:
        raise InvalidArgumentError("irrational alpha needs r_max")
    table = formal_abel_coefficients(nonlinear, xi, n_max, r_max)
    return AbelTable(table.dim, table.alpha, table.order, table.rmax, table.coeffs)


def fold_table(formal: AbelTable, n_max: int | None = None) -> AbelTable:
    """Fold a formal rational-exponent table onto rows ``0 .. q-1``.

    Uses whatever formal rows are stored; it does not test convergence.
    """
    alpha = formal.alpha
    if not alpha.is_rational:
        raise UnsupportedError("only rational exponents fold")
    p, q = alpha.p, alpha.q
    n_max = formal.order if n_max is None else n_max
    X = np.zeros((q, n_max + 1, formal.dim))
    for (r, i), vec in formal.coeffs.items():
        m, rho = divmod(r, q)
        n = i - m * p
        if 0 <= n <= n_max:
            X[rho, n] += vec
    return AbelTable.from_dense(X, alpha, n_max, q - 1)


def abel_closed_form(
    c: float, alpha: AlphaExponent, xi0: Sequence[float], n_max: int, r_max: int
) -> AbelTable:
    """Closed-form coefficients for ``x = xi + c int_0^t (t-s)**(-alpha) x ds``.

    With analytic ``xi = sum_i t**i xi0[i]``:
    ``X_{0,n} = xi0[n]`` and, for ``1 <= r <= n``,
    ``X_{r,n} = c**r xi0[n-r] Gamma(1-alpha)**r Gamma(1+n-r) / Gamma(1+n-r alpha)``.
    Rational exponents give the unfolded table; see :func:`fold_table`.
    """
    n_max = check_nonneg_int(n_max, "n_max")
    r_max = check_nonneg_int(r_max, "r_max")
    xi0 = np.asarray(xi0, dtype=float).reshape(-1)
    lg = math.lgamma(1.0 - alpha.value)
    coeffs = {}
    for n in range(min(n_max, len(xi0) - 1) + 1):
        coeffs[(0, n)] = [xi0[n]]
    if c != 0.0:
        for r in range(1, r_max + 1):
            for n in range(r, n_max + 1):
                if n - r >= len(xi0) or xi0[n - r] == 0.0:
                    continue
                mag = math.exp(
                    r * (lg + math.log(abs(c)))
                    + math.lgamma(1.0 + n - r)
                    - math.lgamma(1.0 + n - r * alpha.value)
                )
                sign = -1.0 if (c < 0 and r % 2) else 1.0
                coeffs[(r, n)] = [sign * mag * xi0[n - r]]
    return AbelTable(1, alpha, n_max, r_max, coeffs, folded=not alpha.is_rational)


def mittag_leffler_problem(
    alpha: AlphaExponent, c: float = 1.0
) -> tuple[AbelKernelExpansion, AbelTable]:
    """Kernel ``c (t-s)**(-alpha)`` and forcing ``xi = 1``.

    The solution is ``E_{1-alpha}(c Gamma(1-alpha) t**(1-alpha))``.
    """
    kernel = AbelKernelExpansion(
        1, alpha, LinearKernelExpansion(1, {}), LinearKernelExpansion(1, {(0, 0): [[c]]})
    )
    xi = AbelTable(1, alpha, 0, 0, {(0, 0): [1.0]})
    return kernel, xi
