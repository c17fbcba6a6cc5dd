"""Majorant sequences and certified radius lower bounds for linear problems.

Norms are the max-abs vector norm and the induced max-row-sum matrix norm.

Regular case: ``L_n = sum_{i+j=n-1} ||K_ij||`` and
``C_n = ||Xi_n|| + sum_{l<n} L_{n-l} C_l`` dominate the coefficients. If
``||Xi_n|| <= M0 / R**n`` and ``L_n <= M / R**n`` then the series converges
for ``|t| < R / (1 + R M)``.

Abel case with ``alpha = p/q``: the grouped norms
``XX_i = sum_{r alpha < i+1} delta**(-r alpha) ||X_{r,i}||`` satisfy
``XX_n <= XiXi_n + sum_{l<n} (q L_{n-l} + delta**(-alpha) B(1-alpha, 1/q) M_{n-l}) XX_l``
which is the regular majorant with ``L`` replaced by that bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import check_finite_positive, check_nonneg_int
from .abel import beta_fn, formal_abel_coefficients
from .errors import InvalidArgumentError, UnsupportedError
from .kernels import AbelKernelExpansion, LinearKernelExpansion
from .series import AbelTable, AlphaExponent, TaylorTable

ENVELOPE_RTOL = 1e-12


def vector_norm(v: np.ndarray) -> float:
    """Max-absolute-component norm."""
    return float(np.max(np.abs(v), initial=0.0))


def matrix_norm(m: np.ndarray) -> float:
    """Operator norm induced by :func:`vector_norm` (max row sum)."""
    return float(np.max(np.sum(np.abs(m), axis=1), initial=0.0))


def _kernel_l(kernel: LinearKernelExpansion, n_max: int) -> np.ndarray:
    L = np.zeros(n_max + 1)
    for (i, j), mat in kernel.entries.items():
        n = i + j + 1
        if n <= n_max:
            L[n] += matrix_norm(mat)
    return L


def majorant_l(kernel, n_max: int):
    """``L_n = sum_{i=0}^{n-1} ||K_{i,n-i-1}||`` for ``n <= n_max``.

    For an :class:`AbelKernelExpansion` returns the pair ``(L, M)`` built from
    the regular and singular parts.
    """
    n_max = check_nonneg_int(n_max, "n_max")
    if isinstance(kernel, AbelKernelExpansion):
        if not kernel.is_linear:
            raise UnsupportedError("majorants are defined for linear kernels only")
        return _kernel_l(kernel.a, n_max), _kernel_l(kernel.b, n_max)
    if not isinstance(kernel, LinearKernelExpansion):
        raise UnsupportedError("majorants are defined for linear kernels only")
    return _kernel_l(kernel, n_max)


def majorant_c(norm_xi: Sequence[float], L: Sequence[float], n_max: int) -> np.ndarray:
    """``C_0 = ||Xi_0||``, ``C_n = ||Xi_n|| + sum_{l<n} L_{n-l} C_l``.

    ``norm_xi`` and ``L`` are read as zero past their ends.
    """
    n_max = check_nonneg_int(n_max, "n_max")
    xi = _padded(norm_xi, n_max)
    L = _padded(L, n_max)
    if L[0] != 0.0:
        raise InvalidArgumentError("L_0 must be 0")
    C = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        C[n] = xi[n] + float(np.dot(L[n:0:-1], C[:n]))
    return C


def _padded(seq: Sequence[float], n_max: int) -> np.ndarray:
    arr = np.asarray(seq, dtype=float).reshape(-1)[: n_max + 1]
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("majorant inputs must be finite and nonnegative")
    out = np.zeros(n_max + 1)
    out[: arr.size] = arr
    return out


@dataclass(frozen=True)
class MajorantData:
    """Majorant sequences of one linear problem (``M`` is empty for regular kernels)."""

    L: np.ndarray
    M: np.ndarray
    C: np.ndarray
    norm_xi: np.ndarray


def majorants(kernel: LinearKernelExpansion, xi: TaylorTable, n_max: int) -> MajorantData:
    """Regular-case :class:`MajorantData` for ``n <= n_max``."""
    L = majorant_l(kernel, n_max)
    norm_xi = np.array([vector_norm(xi.coefficient(n)) for n in range(n_max + 1)])
    return MajorantData(L, np.zeros(0), majorant_c(norm_xi, L, n_max), norm_xi)


@dataclass(frozen=True)
class GeometricEnvelope:
    """``||Xi_n|| <= M0 / R**n`` and ``L_n <= M / R**n``."""

    M0: float
    M: float
    R: float

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InvalidArgumentError(f"R must be positive and finite, got {self.R}")
        if self.M0 < 0 or self.M < 0:
            raise InvalidArgumentError("M0 and M must be nonnegative")

    def holds(self, norm_xi: Sequence[float], L: Sequence[float]) -> bool:
        """Check both inequalities on the supplied prefixes."""
        return _dominated(norm_xi, self.M0, self.R) and _dominated(L, self.M, self.R)


@dataclass(frozen=True)
class AbelEnvelope:
    """Grouped forcing ``<= C0 / R**n``, ``L_n <= C_L / R**n``, ``M_n <= C_M / R**n``."""

    C0: float
    C_L: float
    C_M: float
    R: float
    delta: float

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InvalidArgumentError(f"R must be positive and finite, got {self.R}")
        check_finite_positive(self.delta, "delta")
        if min(self.C0, self.C_L, self.C_M) < 0:
            raise InvalidArgumentError("envelope constants must be nonnegative")

    def c_delta(self, alpha: AlphaExponent) -> float:
        """``C_delta = q C_L + delta**(-alpha) B(1-alpha, 1/q) C_M``."""
        return alpha.q * self.C_L + self.delta ** (-alpha.value) * beta_fn(
            1.0 - alpha.value, 1.0 / alpha.q
        ) * self.C_M

    def holds(self, grouped_xi: Sequence[float], L: Sequence[float], M: Sequence[float]) -> bool:
        return (
            _dominated(grouped_xi, self.C0, self.R)
            and _dominated(L, self.C_L, self.R)
            and _dominated(M, self.C_M, self.R)
        )


def _dominated(seq: Sequence[float], const: float, R: float) -> bool:
    seq = np.asarray(seq, dtype=float)
    n = np.arange(seq.size)
    cap = const * np.exp(-n * math.log(R))
    return bool(np.all(seq <= cap * (1 + ENVELOPE_RTOL) + 1e-300))


def _fit_radius(seqs: Sequence[np.ndarray]) -> float:
    rate = 0.0
    for seq in seqs:
        for n in range(1, len(seq)):
            if seq[n] > 0:
                rate = max(rate, seq[n] ** (1.0 / n))
    return 1.0 if rate == 0.0 else 1.0 / rate


def _fit_const(seq: np.ndarray, R: float) -> float:
    n = np.arange(seq.size)
    return float(np.max(seq * np.exp(n * math.log(R)), initial=0.0))


def fit_envelope(
    norm_xi: Sequence[float], L: Sequence[float], R: float | None = None
) -> GeometricEnvelope:
    """Fit a geometric envelope to finite prefixes of ``||Xi_n||`` and ``L_n``.

    ``R`` defaults to ``1 / max_{n>=1} max(||Xi_n||, L_n)**(1/n)`` (1 when both
    tails vanish). ``M0`` and ``M`` are then the smallest constants valid on
    the prefix. The fit says nothing about terms past the prefix; for
    polynomial kernels and forcing supply the full coefficient lists.
    """
    norm_xi = np.asarray(norm_xi, dtype=float)
    L = np.asarray(L, dtype=float)
    if R is None:
        R = _fit_radius([norm_xi, L])
    R = check_finite_positive(R, "R")
    env = GeometricEnvelope(_fit_const(norm_xi, R), _fit_const(L, R), R)
    if not env.holds(norm_xi, L):
        raise InvalidArgumentError("fitted envelope does not dominate the prefix")
    return env


def fit_abel_envelope(
    grouped_xi: Sequence[float],
    L: Sequence[float],
    M: Sequence[float],
    delta: float,
    R: float | None = None,
) -> AbelEnvelope:
    """Abel analogue of :func:`fit_envelope` for ``(XiXi_n, L_n, M_n)``."""
    seqs = [np.asarray(s, dtype=float) for s in (grouped_xi, L, M)]
    if R is None:
        R = _fit_radius(seqs)
    R = check_finite_positive(R, "R")
    env = AbelEnvelope(*(_fit_const(s, R) for s in seqs), R=R, delta=delta)
    if not env.holds(*seqs):
        raise InvalidArgumentError("fitted envelope does not dominate the prefix")
    return env


def radius_bound_regular(env: GeometricEnvelope) -> float:
    """Certified lower bound ``R / (1 + R M)`` on the radius of convergence."""
    if not env.R > 0:
        raise InvalidArgumentError("R must be positive")
    return env.R / (1.0 + env.R * env.M)


def radius_bound_abel(env: AbelEnvelope, alpha: AlphaExponent) -> float:
    """``R / (1 + R C_delta)``: radius of the grouped series ``sum t**n XX_n``.

    The ungrouped series then converges absolutely for
    ``delta <= t < R / (1 + R C_delta)``.
    """
    if not alpha.is_rational:
        raise UnsupportedError("the Abel radius bound needs a rational exponent")
    return env.R / (1.0 + env.R * env.c_delta(alpha))


def abel_grouped_norms(table: AbelTable, delta: float, n_max: int | None = None) -> np.ndarray:
    """``XX_i = sum_{r : r alpha < i+1} delta**(-r alpha) ||X_{r,i}||``."""
    delta = check_finite_positive(delta, "delta")
    n_max = table.order if n_max is None else check_nonneg_int(n_max, "n_max")
    alpha = table.alpha
    out = np.zeros(n_max + 1)
    for (r, i), vec in table.coeffs.items():
        if i <= n_max and r * alpha.value < i + 1:
            out[i] += delta ** (-r * alpha.value) * vector_norm(vec)
    return out


@dataclass(frozen=True)
class GroupedCheck:
    """Left and right sides of the grouped Abel inequality per ``n``."""

    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.lhs <= self.rhs * (1 + 1e-12) + 1e-300))


def abel_grouped_check(
    kernel: AbelKernelExpansion, xi: AbelTable, delta: float, n_max: int
) -> GroupedCheck:
    """Evaluate the grouped inequality on the formal coefficient table.

    Rows up to ``ceil((n_max + 1) / alpha)`` are computed so that every
    ``r`` with ``r alpha < n + 1`` is present.
    """
    alpha = kernel.alpha
    if not alpha.is_rational:
        raise UnsupportedError("the grouped inequality needs a rational exponent")
    L, M = majorant_l(kernel, n_max)
    r_max = math.ceil((n_max + 1) * alpha.q / alpha.p)
    formal = formal_abel_coefficients(kernel, xi, n_max, r_max)
    grouped = abel_grouped_norms(formal, delta, n_max)
    grouped_xi = abel_grouped_norms(xi, delta, n_max)
    weight = alpha.q * L + delta ** (-alpha.value) * beta_fn(1.0 - alpha.value, 1.0 / alpha.q) * M
    rhs = np.array(
        [grouped_xi[n] + float(np.dot(weight[n:0:-1], grouped[:n])) for n in range(n_max + 1)]
    )
    return GroupedCheck(grouped, rhs)
