"""Independent numerical references for the series solvers.

* :func:`solve_second_kind_numeric` -- product-trapezoidal time stepping. The
  smooth factor of the integrand is interpolated linearly on each subinterval
  and integrated exactly against the weight ``1``, ``(t-s)**(-alpha)``,
  ``ln(t-s)`` or ``ln s - ln t``, so the weight is never sampled where it is
  singular.
* :func:`residual_check` -- plugs a series back into its equation, with the
  integral done by adaptive quadrature.
* :func:`integral_moment_numeric` -- adaptive quadrature of the log moments.

Apart from :func:`~volterra_series.series.evaluate` nothing here touches the
series solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from ._validation import check_nonneg_int
from .errors import DomainError, InvalidArgumentError, StepFailureError, UnsupportedError
from .kernels import (
    AbelKernelExpansion,
    LinearKernelExpansion,
    LogKernelExpansion,
    LogVariant,
    NonlinearKernelExpansion,
)
from .problem import Problem
from .series import AbelTable, LogTable, Series, TaylorTable, evaluate

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 200
QUAD_OPTS = {"epsabs": 1e-13, "epsrel": 1e-10, "limit": 200}


@dataclass(frozen=True)
class Grid:
    """Uniform nodes ``t_m = m h`` on ``[0, t_end]``."""

    t_end: float
    steps: int

    def __post_init__(self):
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise InvalidArgumentError(f"t_end must be positive and finite, got {self.t_end}")
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 4:
            raise InvalidArgumentError(f"steps must be an integer >= 4, got {self.steps!r}")

    @property
    def h(self) -> float:
        return self.t_end / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.h


# -- kernel parts ---------------------------------------------------------------


class _Part:
    """One smooth kernel factor ``sum_i t**i G_i(s, x)`` with its weight type."""

    def __init__(self, kernel, weight: str):
        self.weight = weight
        self.linear = isinstance(kernel, LinearKernelExpansion)
        nl = NonlinearKernelExpansion.from_linear(kernel) if self.linear else kernel
        keys = list(nl.entries)
        self.dim = kernel.dim
        self.i = np.array([k[0] for k in keys], dtype=int)
        self.j = np.array([k[1] for k in keys], dtype=float)
        self.k = np.array([k[2] for k in keys], dtype=float).reshape(len(keys), self.dim)
        self.F = np.array([nl.entries[k] for k in keys]).reshape(len(keys), self.dim)
        self.n_i = int(self.i.max(initial=-1)) + 1
        self.matrices = dict(kernel.entries) if self.linear else None

    @property
    def empty(self) -> bool:
        return self.n_i == 0

    def g_parts(self, s: float, x: np.ndarray) -> np.ndarray:
        """``G_i(s, x)`` for every ``i``, shape ``(n_i, dim)``."""
        out = np.zeros((self.n_i, self.dim))
        if self.n_i:
            vals = s**self.j * np.prod(x[None, :] ** self.k, axis=1)
            np.add.at(out, self.i, vals[:, None] * self.F)
        return out

    def value(self, t: float, s: float, x: np.ndarray) -> np.ndarray:
        parts = self.g_parts(s, x)
        return (t ** np.arange(self.n_i)) @ parts if self.n_i else np.zeros(self.dim)

    def matrix(self, t: float, s: float) -> np.ndarray:
        """``k(t, s)`` for a linear part."""
        out = np.zeros((self.dim, self.dim))
        for (i, j), mat in self.matrices.items():
            out += t**i * s**j * mat
        return out


def _parts(problem: Problem) -> list[_Part]:
    kernel = problem.kernel
    if isinstance(kernel, AbelKernelExpansion):
        parts = [_Part(kernel.a, "one"), _Part(kernel.b, "abel")]
    elif isinstance(kernel, LogKernelExpansion):
        w = "ln" if kernel.variant is LogVariant.T_MINUS_S else "lnratio"
        parts = [_Part(kernel.a, "one"), _Part(kernel.b, w)]
    else:
        parts = [_Part(kernel, "one")]
    return [p for p in parts if not p.empty]


# -- product weights ------------------------------------------------------------


def _offset_weights(weight: str, h: float, steps: int, alpha: float = 0.0):
    """Left/right node weights for ``u = t_n - s`` in ``[(d-1)h, dh]``, ``d >= 1``.

    ``left[d]`` multiplies the value at ``s = t_n - d h`` and ``right[d]`` the
    value at ``s = t_n - (d-1) h``.
    """
    U = np.arange(steps + 1) * h
    if weight == "one":
        P0, P1 = U, U**2 / 2
    elif weight == "abel":
        P0 = U ** (1 - alpha) / (1 - alpha)
        P1 = U ** (2 - alpha) / (2 - alpha)
    elif weight == "ln":
        with np.errstate(divide="ignore", invalid="ignore"):
            lnU = np.where(U > 0, np.log(np.where(U > 0, U, 1.0)), 0.0)
        P0 = U * lnU - U
        P1 = U**2 / 2 * lnU - U**2 / 4
    else:
        raise InvalidArgumentError(f"unknown weight {weight!r}")
    I0 = np.diff(P0)
    I1 = np.diff(P1)
    Ua, Ub = U[:-1], U[1:]
    left = np.concatenate([[0.0], (I1 - Ua * I0) / h])
    right = np.concatenate([[0.0], (Ub * I0 - I1) / h])
    return left, right


def _lnratio_weights(h: float, steps: int):
    """Left/right weights of ``ln s`` on ``[s_m, s_{m+1}]``, indexed by ``m``."""
    S = np.arange(steps + 1) * h
    with np.errstate(divide="ignore", invalid="ignore"):
        lnS = np.where(S > 0, np.log(np.where(S > 0, S, 1.0)), 0.0)
    P0 = S * lnS - S
    P1 = S**2 / 2 * lnS - S**2 / 4
    J0 = np.diff(P0)
    J1 = np.diff(P1)
    left = (S[1:] * J0 - J1) / h
    right = (J1 - S[:-1] * J0) / h
    return left, right


# -- forcing at the nodes ---------------------------------------------------------


def _xi_at(xi: Series, t: float) -> np.ndarray:
    """``xi(t)``; at ``t = 0`` the limit, which must exist."""
    if t > 0 or isinstance(xi, TaylorTable):
        return evaluate(xi, t)
    out = np.zeros(xi.dim)
    if isinstance(xi, AbelTable):
        for (r, i), vec in xi.coeffs.items():
            key = xi.alpha.exponent_key(r, i)
            if key == 0:
                out += vec
            elif key < 0:
                raise DomainError(f"forcing term t**({xi.alpha.display(r, i)}) is singular at t = 0")
        return out
    if isinstance(xi, LogTable):
        if np.any(xi.coeffs[1:, 0] != 0.0):
            raise DomainError("forcing term with (ln t)**r, r >= 1, is singular at t = 0")
        return xi.coeffs[0, 0].copy()
    raise InvalidArgumentError(f"unsupported forcing type {type(xi).__name__}")


# -- time stepping --------------------------------------------------------------------


def solve_second_kind_numeric(problem: Problem, grid: Grid) -> np.ndarray:
    """Values ``x(t_m)`` at every grid node, shape ``(steps + 1, dim)``.

    Linear problems solve the implicit node equation directly; nonlinear
    ones iterate it to a fixed point with relative tolerance ``1e-12``.

    Raises
    ------
    StepFailureError
        The fixed-point iteration at some node does not converge.
    """
    if problem.kind != "second-kind":
        raise UnsupportedError("time stepping covers second-kind problems only")
    h, steps, dim = grid.h, grid.steps, problem.dim
    t = grid.nodes
    parts = _parts(problem)
    alpha = problem.kernel.alpha.value if problem.singularity == "abel" else 0.0
    weights = {}
    for part in parts:
        if part.weight == "lnratio":
            weights[part.weight] = _lnratio_weights(h, steps)
        else:
            weights[part.weight] = _offset_weights(part.weight, h, steps, alpha)
    # store[p][i, m] = G_i(t_m, x_m) for part p
    store = [np.zeros((p.n_i, steps + 1, dim)) for p in parts]
    x = np.zeros((steps + 1, dim))
    x[0] = _xi_at(problem.xi, 0.0)
    for idx, p in enumerate(parts):
        store[idx][:, 0] = p.g_parts(0.0, x[0])
    linear = problem.is_linear

    for n in range(1, steps + 1):
        tn = t[n]
        explicit = _xi_at(problem.xi, tn).copy()
        diag = []  # (part, weight on the implicit node)
        for idx, p in enumerate(parts):
            tpow = tn ** np.arange(p.n_i)
            g = np.tensordot(tpow, store[idx][:, :n], axes=1)  # (n, dim)
            w_nodes, w_last = _node_weights(p.weight, weights[p.weight], n, tn, h)
            explicit += w_nodes @ g
            diag.append((p, w_last))
        if linear:
            mat = np.eye(dim)
            for p, w in diag:
                mat -= w * p.matrix(tn, tn)
            x[n] = np.linalg.solve(mat, explicit)
        else:
            x[n] = _fixed_point(explicit, diag, tn, x[n - 1], n)
        for idx, p in enumerate(parts):
            store[idx][:, n] = p.g_parts(tn, x[n])
    return x


def _node_weights(weight: str, table, n: int, tn: float, h: float):
    """Weights on nodes ``0 .. n-1`` and on node ``n`` for the integral at ``t_n``."""
    left, right = table
    if weight == "lnratio":
        w = np.zeros(n + 1)
        w[:n] += left[:n]
        w[1 : n + 1] += right[:n]
        trap = np.full(n + 1, h)
        trap[0] = trap[n] = h / 2
        w -= math.log(tn) * trap
        return w[:n], w[n]
    d = n - np.arange(n + 1)  # offset of each node
    w = np.zeros(n + 1)
    w[:n] += left[d[:n]]
    w[1:] += right[d[1:] + 1]
    return w[:n], w[n]


def _fixed_point(explicit, diag, tn, guess, node) -> np.ndarray:
    x = guess.copy()
    for _ in range(FIXED_POINT_MAX_ITER):
        new = explicit.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            for p, w in diag:
                new += w * p.value(tn, tn, x)
        if not np.all(np.isfinite(new)):
            break
        if np.max(np.abs(new - x)) <= FIXED_POINT_TOL * max(1.0, float(np.max(np.abs(new)))):
            return new
        x = new
    raise StepFailureError(f"fixed-point iteration failed at node {node} (t={tn:g})", node)


# -- residuals ----------------------------------------------------------------------------


def _integral(fn: Callable[[float], float], a: float, b: float) -> float:
    return quad(fn, a, b, **QUAD_OPTS)[0]


def residual_check(problem: Problem, series: Series, t_points: Sequence[float]) -> float:
    """``max_t ||x(t) - xi(t) - int_0^t f(t, s, x(s)) ds||`` (max-abs norm).

    First-kind problems use ``||xi(t) + int_0^t k(t, s) x(s) ds||``. Abel
    parts substitute ``u = (t-s)**(1-alpha)``, which removes the diagonal
    singularity; the rest is plain adaptive quadrature.
    """
    parts = _parts(problem)
    alpha = problem.kernel.alpha.value if problem.singularity == "abel" else 0.0
    worst = 0.0
    for t in t_points:
        t = float(t)
        if not t > 0:
            raise DomainError(f"residual points must be positive, got {t}")
        x_t = evaluate(series, t)
        integral = np.zeros(problem.dim)
        for p in parts:
            integral += _part_integral(p, series, t, alpha)
        xi_t = _xi_at(problem.xi, t)
        if problem.kind == "first-kind":
            res = xi_t + integral
        else:
            res = x_t - xi_t - integral
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def _part_integral(p: _Part, series: Series, t: float, alpha: float) -> np.ndarray:
    out = np.zeros(p.dim)
    for comp in range(p.dim):
        if p.weight == "abel":
            e = 1.0 / (1.0 - alpha)

            def f(u, comp=comp):
                s = t - u**e
                return p.value(t, s, evaluate(series, s))[comp]

            out[comp] = e * _integral(f, 0.0, t ** (1.0 - alpha))
            continue
        if p.weight == "one":
            w = lambda s: 1.0
        elif p.weight == "ln":
            w = lambda s: math.log(t - s)
        else:
            w = lambda s: math.log(s / t)

        def g(s, comp=comp, w=w):
            return w(s) * p.value(t, s, evaluate(series, s))[comp]

        out[comp] = _integral(g, 0.0, t)
    return out


# -- moments ----------------------------------------------------------------------------


def integral_moment_numeric(which: str, q: int, r: int) -> float:
    """``L[q, r] = int_0^1 s**q (ln s)**r ds`` or ``M[q, r]`` (extra ``ln(1-s)``).

    ``L`` uses ``s = exp(-u)`` on ``[0, inf)``. ``M`` splits at ``1/2`` and
    maps each half to a half line, ``s = exp(-u)`` near 0 and
    ``s = 1 - exp(-u)`` near 1, so both endpoint singularities become
    exponentially decaying tails.
    """
    q = check_nonneg_int(q, "q")
    r = check_nonneg_int(r, "r")
    opts = {"epsabs": 1e-14, "epsrel": 1e-13, "limit": 400}
    if which == "L":
        return quad(lambda u: math.exp(-(q + 1) * u) * (-u) ** r, 0.0, math.inf, **opts)[0]
    if which != "M":
        raise InvalidArgumentError(f"which must be 'L' or 'M', got {which!r}")
    ln2 = math.log(2.0)

    def near_zero(u):
        return math.exp(-(q + 1) * u) * (-u) ** r * math.log1p(-math.exp(-u))

    def near_one(u):
        e = math.exp(-u)
        return (1.0 - e) ** q * math.log1p(-e) ** r * (-u) * e

    return quad(near_zero, ln2, math.inf, **opts)[0] + quad(near_one, ln2, math.inf, **opts)[0]
