"""Coefficient tables for generalized power series and the operations on them.

Three families of truncated series appear as unknowns and forcing terms:

* :class:`TaylorTable` -- ``x(t) = sum_i t**i X_i``
* :class:`AbelTable` -- ``x(t) = sum_{r,i} t**(i - r*alpha) X_{r,i}``
* :class:`LogTable` -- ``x(t) = sum_{r,i} (ln t)**r t**i X_{r,i}``

Every table is immutable once built and carries explicit truncation bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, NamedTuple, Sequence, Union

import numpy as np
from scipy.signal import convolve2d

from ._validation import (
    as_vector,
    check_multi_index,
    check_nonneg_int,
    check_positive_int,
)
from .errors import DomainError, InvalidArgumentError


@dataclass(frozen=True)
class AlphaExponent:
    """Exponent of the Abel factor ``(t - s)**(-alpha)`` with ``0 < alpha < 1``.

    Build with :meth:`rational` or :meth:`irrational`. An irrational exponent
    is a binary64 value the caller declares to be irrational; no attempt is
    made to detect rationality from the float.
    """

    value: float
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        if self.p is not None:
            if self.q is None or not (0 < self.p < self.q):
                raise InvalidArgumentError(
                    f"rational alpha needs 0 < p < q, got p={self.p}, q={self.q}"
                )
            if math.gcd(self.p, self.q) != 1:
                raise InvalidArgumentError(
                    f"p={self.p} and q={self.q} must be relatively prime"
                )
        elif not (0.0 < self.value < 1.0):
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.value}")

    @classmethod
    def rational(cls, p: int, q: int) -> "AlphaExponent":
        p = check_positive_int(p, "p")
        q = check_positive_int(q, "q")
        if not p < q:
            raise InvalidArgumentError(f"rational alpha needs 0 < p < q, got {p}/{q}")
        return cls(value=p / q, p=p, q=q)

    @classmethod
    def irrational(cls, value: float) -> "AlphaExponent":
        return cls(value=float(value))

    @classmethod
    def parse(cls, text: str | float, irrational: bool = False) -> "AlphaExponent":
        """Parse ``"p/q"`` (rational) or a decimal flagged irrational."""
        if isinstance(text, str) and "/" in text:
            num, _, den = text.partition("/")
            try:
                p, q = int(num), int(den)
            except ValueError:
                raise InvalidArgumentError(f"cannot parse alpha {text!r}") from None
            if not (0 < p < q):
                raise InvalidArgumentError(
                    f"alpha {text!r} violates 0 < p < q (need a proper fraction)"
                )
            return cls.rational(p, q)
        try:
            value = float(text)
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"cannot parse alpha {text!r}") from None
        if not irrational:
            frac = Fraction(value).limit_denominator(10**6)
            if abs(float(frac) - value) > 1e-15:
                raise InvalidArgumentError(
                    f"decimal alpha {text!r} must be flagged irrational, or given as 'p/q'"
                )
            return cls.rational(frac.numerator, frac.denominator)
        return cls.irrational(value)

    @property
    def is_rational(self) -> bool:
        return self.p is not None

    def admissible(self, r: int, i: int) -> bool:
        """Whether ``i > r*alpha - 1``."""
        if self.is_rational:
            return i * self.q > r * self.p - self.q
        return i > r * self.value - 1.0

    def exponent(self, r: int, i: int) -> float:
        if self.is_rational:
            return (i * self.q - r * self.p) / self.q
        return i - r * self.value

    def exponent_key(self, r: int, i: int):
        """Exact sort key for the exponent (integer when rational)."""
        if self.is_rational:
            return i * self.q - r * self.p
        return i - r * self.value

    def display(self, r: int, i: int) -> str:
        if self.is_rational:
            return f"{i}-{r}*{self.p}/{self.q}"
        return f"{i}-{r}*{self.value!r}"

    def __str__(self) -> str:
        if self.is_rational:
            return f"{self.p}/{self.q}"
        return f"{self.value!r} (irrational)"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TaylorTable:
    """Coefficients ``X_0 .. X_order`` of an ``R^N`` valued power series.

    ``coeffs`` has shape ``(order + 1, dim)``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InvalidArgumentError(f"TaylorTable needs shape (order+1, dim), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("TaylorTable coefficients must be finite")
        object.__setattr__(self, "coeffs", _freeze(arr))

    @classmethod
    def scalar(cls, values: Sequence[float]) -> "TaylorTable":
        return cls(np.asarray(values, dtype=float)[:, None])

    @classmethod
    def zeros(cls, order: int, dim: int) -> "TaylorTable":
        return cls(np.zeros((order + 1, dim)))

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    def __getitem__(self, i: int) -> np.ndarray:
        return self.coeffs[i]

    def coefficient(self, i: int) -> np.ndarray:
        """``X_i``, or zeros past the stored order."""
        if i <= self.order:
            return self.coeffs[i]
        return np.zeros(self.dim)

    def truncate(self, order: int) -> "TaylorTable":
        if order > self.order:
            raise InvalidArgumentError(f"cannot extend a table of order {self.order} to {order}")
        return TaylorTable(self.coeffs[: order + 1])


@dataclass(frozen=True)
class AbelTable:
    """Coefficients ``X_{r,i}`` of a series in ``t**(i - r*alpha)``.

    ``coeffs`` maps admissible pairs ``(r, i)`` (``i > r*alpha - 1``) to
    vectors; missing pairs are zero. For rational ``alpha = p/q`` a folded
    table keeps rows ``0 .. q-1`` only; an unfolded (formal) table may hold
    any row, and distinct pairs may then share an exponent.
    """

    dim: int
    alpha: AlphaExponent
    order: int
    rmax: int
    coeffs: Mapping[tuple[int, int], np.ndarray] = field(default_factory=dict)
    folded: bool = True

    def __post_init__(self):
        check_positive_int(self.dim, "dim")
        check_nonneg_int(self.order, "order")
        check_nonneg_int(self.rmax, "rmax")
        if self.alpha.is_rational and self.folded and self.rmax > self.alpha.q - 1:
            raise InvalidArgumentError(
                f"folded table with alpha={self.alpha} keeps rows 0..{self.alpha.q - 1}, "
                f"got rmax={self.rmax}"
            )
        frozen = {}
        for key, value in self.coeffs.items():
            r, i = int(key[0]), int(key[1])
            if not (0 <= r <= self.rmax and 0 <= i <= self.order):
                raise InvalidArgumentError(f"index {(r, i)} outside bounds r<={self.rmax}, i<={self.order}")
            if not self.alpha.admissible(r, i):
                raise InvalidArgumentError(f"index {(r, i)} is not admissible (need i > r*alpha - 1)")
            vec = as_vector(value, self.dim, f"coefficient {(r, i)}")
            if np.any(vec != 0.0):
                frozen[(r, i)] = vec
        object.__setattr__(self, "coeffs", MappingProxyType(frozen))

    def get(self, r: int, i: int) -> np.ndarray:
        vec = self.coeffs.get((r, i))
        if vec is None:
            return np.zeros(self.dim)
        return vec

    def dense(self, rows: int | None = None, cols: int | None = None) -> np.ndarray:
        """Array of shape ``(rows, cols, dim)``; missing entries are zero."""
        rows = self.rmax + 1 if rows is None else rows
        cols = self.order + 1 if cols is None else cols
        out = np.zeros((rows, cols, self.dim))
        for (r, i), vec in self.coeffs.items():
            if r < rows and i < cols:
                out[r, i] = vec
        return out

    @classmethod
    def from_dense(
        cls,
        arr: np.ndarray,
        alpha: AlphaExponent,
        order: int,
        rmax: int,
        folded: bool = True,
    ) -> "AbelTable":
        coeffs = {}
        for r in range(min(rmax + 1, arr.shape[0])):
            for i in range(min(order + 1, arr.shape[1])):
                if alpha.admissible(r, i) and np.any(arr[r, i] != 0.0):
                    coeffs[(r, i)] = arr[r, i]
        return cls(arr.shape[2], alpha, order, rmax, coeffs, folded)

    @classmethod
    def from_taylor(cls, table: TaylorTable, alpha: AlphaExponent, rmax: int = 0) -> "AbelTable":
        coeffs = {(0, i): table.coeffs[i] for i in range(table.order + 1)}
        return cls(table.dim, alpha, table.order, rmax, coeffs)

    def row(self, r: int) -> TaylorTable:
        """Row ``r`` as a Taylor table of the same order."""
        return TaylorTable(self.dense(self.rmax + 1)[r])


@dataclass(frozen=True)
class LogTable:
    """Coefficients ``X_{r,i}`` of a series in ``(ln t)**r * t**i``.

    ``coeffs`` has shape ``(rmax + 1, order + 1, dim)``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        if arr.ndim != 3 or 0 in arr.shape:
            raise InvalidArgumentError(f"LogTable needs shape (rmax+1, order+1, dim), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("LogTable coefficients must be finite")
        object.__setattr__(self, "coeffs", _freeze(arr))

    @classmethod
    def from_entries(
        cls, dim: int, order: int, rmax: int, entries: Mapping[tuple[int, int], Sequence[float]]
    ) -> "LogTable":
        arr = np.zeros((rmax + 1, order + 1, dim))
        for (r, i), value in entries.items():
            if not (0 <= r <= rmax and 0 <= i <= order):
                raise InvalidArgumentError(f"index {(r, i)} outside bounds r<={rmax}, i<={order}")
            arr[r, i] = as_vector(value, dim, f"coefficient {(r, i)}")
        return cls(arr)

    @classmethod
    def from_taylor(cls, table: TaylorTable, rmax: int = 0) -> "LogTable":
        arr = np.zeros((rmax + 1, table.order + 1, table.dim))
        arr[0] = table.coeffs
        return cls(arr)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[2]

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def rmax(self) -> int:
        return self.coeffs.shape[0] - 1

    def row(self, r: int) -> TaylorTable:
        return TaylorTable(self.coeffs[r])


Series = Union[TaylorTable, AbelTable, LogTable]


# -- multinomial coefficient extraction -------------------------------------


def _trunc_power_1d(a: np.ndarray, power: int, length: int) -> np.ndarray:
    out = np.zeros(length)
    out[0] = 1.0
    for _ in range(power):
        out = np.convolve(out, a[:length])[:length]
    return out


def z_coeff(k: Sequence[int], Y: TaylorTable, l: int) -> float:
    """Coefficient of ``t**l`` in ``prod_j (sum_i t**i X_i[j])**k[j]``.

    Only ``X_0 .. X_l`` are read. The product is expanded in full, so each of
    the ``k[j]`` copies of component ``j`` carries its own summation index.
    """
    k = check_multi_index(k, Y.dim)
    l = check_nonneg_int(l, "l")
    if l > Y.order:
        raise InvalidArgumentError(f"l={l} exceeds table order {Y.order}")
    prod = np.zeros(l + 1)
    prod[0] = 1.0
    for j, kj in enumerate(k):
        if kj:
            prod = np.convolve(prod, _trunc_power_1d(Y.coeffs[:, j], kj, l + 1))[: l + 1]
    return float(prod[l])


def power_coefficients_2d(k: Sequence[int], dense: np.ndarray, rho: int, l: int) -> np.ndarray:
    """Truncated 2-D multinomial power of a graded vector series.

    ``dense[r, i, j]`` is the coefficient of grade ``(r, i)`` in component
    ``j``. Returns the ``(rho + 1, l + 1)`` array of coefficients of
    ``prod_j (component j)**k[j]``, where grades add under multiplication.
    """
    out = np.zeros((rho + 1, l + 1))
    out[0, 0] = 1.0
    rows = min(rho + 1, dense.shape[0])
    cols = min(l + 1, dense.shape[1])
    for j, kj in enumerate(k):
        if not kj:
            continue
        base = np.zeros((rho + 1, l + 1))
        base[:rows, :cols] = dense[:rows, :cols, j]
        for _ in range(kj):
            out = convolve2d(out, base)[: rho + 1, : l + 1]
    return out


def z_coeff_bi(k: Sequence[int], Y: AbelTable, rho: int, l: int) -> float:
    """Coefficient of ``t**(l - rho*alpha)`` in ``x(t)**k`` for an Abel series.

    Terms are grouped by total row weight ``rho`` and total integer weight
    ``l``; for ``k = 0`` the result is 1 exactly when ``rho = l = 0``.
    """
    k = check_multi_index(k, Y.dim)
    rho = check_nonneg_int(rho, "rho")
    l = check_nonneg_int(l, "l")
    if not any(k):
        return 1.0 if rho == 0 and l == 0 else 0.0
    dense = Y.dense(min(rho, Y.rmax) + 1, min(l, Y.order) + 1)
    return float(power_coefficients_2d(k, dense, rho, l)[rho, l])


# -- evaluation ---------------------------------------------------------------


def evaluate(series: Series, t: float) -> np.ndarray:
    """Partial sum of a truncated series at ``t``.

    Taylor tables accept any real ``t``; Abel and log tables need ``t > 0``.
    Terms of the singular tables are accumulated per component with
    :func:`math.fsum` after sorting by descending exponent, so the result does
    not depend on storage order.
    """
    t = float(t)
    if isinstance(series, TaylorTable):
        acc = np.zeros(series.dim)
        for coeff in series.coeffs[::-1]:
            acc = acc * t + coeff
        return acc
    if not t > 0:
        raise DomainError(f"t must be positive for {type(series).__name__}, got {t}")
    if isinstance(series, AbelTable):
        alpha = series.alpha
        keys = sorted(series.coeffs, key=lambda ri: alpha.exponent_key(*ri), reverse=True)
        terms = [t ** alpha.exponent(r, i) * series.coeffs[(r, i)] for r, i in keys]
    elif isinstance(series, LogTable):
        lnt = math.log(t)
        order = [(r, i) for r in range(series.rmax + 1) for i in range(series.order + 1)]
        order.sort(key=lambda ri: (ri[1], ri[0]), reverse=True)
        terms = [lnt**r * t**i * series.coeffs[r, i] for r, i in order]
    else:
        raise InvalidArgumentError(f"cannot evaluate {type(series).__name__}")
    if not terms:
        return np.zeros(series.dim)
    stacked = np.array(terms)
    return np.array([math.fsum(stacked[:, j]) for j in range(series.dim)])


# -- radius estimation ----------------------------------------------------------


DECAY_C2 = 0.5
DECAY_RMS = 0.25


class RadiusEstimate(NamedTuple):
    """Empirical radius of convergence; an estimate, never a bound."""

    radius: float
    low_confidence: bool
    note: str


def estimate_radius(series: TaylorTable, min_terms: int = 8) -> RadiusEstimate:
    """Root-test estimate ``1 / max ||X_n||**(1/n)`` over the last half.

    Needs at least ``min_terms`` nonzero coefficients in the last half of the
    table; otherwise returns ``inf`` flagged low-confidence. When the tail
    decays faster than any geometric sequence (``log ||X_n||`` bends down like
    ``-n log n`` with an rms misfit of at most ``DECAY_RMS``), the series is
    taken to be entire and ``inf`` is returned with a decay flag.
    """
    norms = np.max(np.abs(series.coeffs), axis=1)
    start = max(1, (series.order + 1) // 2)
    ns = np.arange(start, series.order + 1)
    tail = norms[start:]
    mask = tail > 0
    if mask.sum() < min_terms:
        return RadiusEstimate(math.inf, True, "fewer than %d nonzero trailing coefficients" % min_terms)
    ns, tail = ns[mask], tail[mask]
    logs = np.log(tail)
    roots = np.exp(-logs / ns)
    # fit log|X_n| ~ c0 + c1 n - c2 n log n; a clean fit with c2 > 0.5 marks factorial-type decay
    design = np.column_stack([np.ones_like(ns, dtype=float), ns, -ns * np.log(ns)])
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    rms = float(np.sqrt(np.mean((design @ coef - logs) ** 2)))
    if coef[2] > DECAY_C2 and rms <= DECAY_RMS:
        return RadiusEstimate(math.inf, True, "superexponential decay: series looks entire")
    return RadiusEstimate(float(np.min(roots)), False, "root test over last half")
