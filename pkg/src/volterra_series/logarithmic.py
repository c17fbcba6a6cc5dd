"""Series in ``(ln t)**r t**i`` for kernels with logarithmic singularities.

Two kernel shapes are handled::

    f = a(t, s, x) + ln(t - s) b(t, s, x)          (LogVariant.T_MINUS_S)
    f = a(t, s, x) + (ln s - ln t) b(t, s, x)      (LogVariant.LN_RATIO)

With ``sigma = s/t`` and ``P = j + lam`` (the total power of ``s``)::

    int_0^t t^i s^P (ln s)^rho ds
        = t^(i+P+1) sum_mu C(rho, mu) (ln t)^mu L[P, rho-mu]
    int_0^t t^i s^P (ln s)^rho ln(t-s) ds
        = t^(i+P+1) sum_mu C(rho, mu) (ln t)^mu
              ((ln t) L[P, rho-mu] + M[P, rho-mu])
    int_0^t t^i s^P (ln s)^rho (ln s - ln t) ds
        = t^(i+P+1) sum_mu C(rho, mu) (ln t)^mu L[P, rho-mu+1]

where ``L[q, r] = int_0^1 sigma^q (ln sigma)^r`` and
``M[q, r] = int_0^1 sigma^q (ln sigma)^r ln(1 - sigma)``. The coefficient
system is explicit in ``n`` (every ``X_{mu,n}`` uses only columns ``< n``)
but couples all log powers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import zeta

from ._validation import check_nonneg_int
from .errors import InvalidArgumentError
from .kernels import LogKernelExpansion, LogVariant
from .series import LogTable, power_coefficients_2d

log = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def moment_l(q: int, r: int) -> float:
    """``int_0^1 sigma**q (ln sigma)**r dsigma = (-1)**r r! / (q+1)**(r+1)``."""
    q = check_nonneg_int(q, "q")
    r = check_nonneg_int(r, "r")
    return (-1) ** r * math.factorial(r) / (q + 1) ** (r + 1)


@lru_cache(maxsize=None)
def moment_m(q: int, r: int) -> float:
    """``int_0^1 sigma**q (ln sigma)**r ln(1 - sigma) dsigma``.

    Expanding ``ln(1 - sigma) = -sum_{lam>=0} sigma**(lam+1) / (lam+1)`` gives
    ``-sum_lam L[q+lam+1, r] / (lam+1)``, i.e. ``-(-1)**r r! S`` with
    ``S = sum_{y>=1} 1 / (y (y+b)**(r+1))`` and ``b = q + 1``. Partial
    fractions sum ``S`` exactly::

        S = H_b / b**(r+1) - sum_{m=2}^{r+1} zeta(m, b+1) / b**(r+2-m)

    with ``H_b`` the harmonic number and ``zeta(m, a)`` the Hurwitz zeta.
    """
    q = check_nonneg_int(q, "q")
    r = check_nonneg_int(r, "r")
    b = q + 1
    harmonic = math.fsum(1.0 / y for y in range(1, b + 1))
    terms = [harmonic / b ** (r + 1)]
    terms += [-float(zeta(m, b + 1)) / b ** (r + 2 - m) for m in range(2, r + 2)]
    return -((-1) ** r) * math.factorial(r) * math.fsum(terms)


def moment_m_series(q: int, r: int, terms: int) -> float:
    """Partial sum of the defining series for ``M[q, r]`` (first ``terms`` terms)."""
    lam = np.arange(terms, dtype=float)
    s = np.sum(1.0 / ((lam + 1.0) * (q + lam + 2.0) ** (r + 1)))
    return -((-1) ** r) * math.factorial(r) * float(s)


def moment_m0_closed(q: int) -> float:
    """``M[q, 0] = -H_{q+1} / (q+1)``, the ``r = 0`` closed form."""
    return -math.fsum(1.0 / y for y in range(1, q + 2)) / (q + 1)


@dataclass(frozen=True)
class MomentTable:
    """Precomputed ``L[q, r]`` and ``M[q, r]`` for ``q <= q_max``, ``r <= r_max``."""

    q_max: int
    r_max: int
    L: np.ndarray = field(init=False, repr=False)
    M: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        L = np.array([[moment_l(q, r) for r in range(self.r_max + 1)] for q in range(self.q_max + 1)])
        M = np.array([[moment_m(q, r) for r in range(self.r_max + 1)] for q in range(self.q_max + 1)])
        L.flags.writeable = False
        M.flags.writeable = False
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "M", M)


@dataclass
class LogSolution:
    """Result of :func:`solve_log_system` with truncation diagnostics."""

    table: LogTable
    warnings: list[str] = field(default_factory=list)
    dropped: float = 0.0
    """Largest norm of any contribution to a log power above ``r_max``."""


def solve_log_system(
    kernel: LogKernelExpansion, xi: LogTable, n_max: int, r_max: int
) -> LogSolution:
    """Coefficients ``X_{mu,n}``, ``mu <= r_max``, ``n <= n_max``.

    Columns are filled in increasing ``n``; for each ``n`` every log power is
    explicit in the earlier columns. ``Z_k`` sums over every log weight
    ``rho`` that the stored coefficients produce, so the ``rho`` sums are
    finite. A contribution that would land on a log power above ``r_max`` is
    dropped and recorded in :attr:`LogSolution.warnings`.

    The moment first index is the full power of ``s`` in the integrand,
    ``j + l.k = n - i - 1``.
    """
    if kernel.dim != xi.dim:
        raise InvalidArgumentError(f"kernel dimension {kernel.dim} != forcing dimension {xi.dim}")
    n_max = check_nonneg_int(n_max, "n_max")
    r_max = check_nonneg_int(r_max, "r_max")
    nonlinear = kernel.as_nonlinear()
    dim = kernel.dim
    X = np.zeros((r_max + 1, n_max + 1, dim))
    powers = sorted(nonlinear.a.multi_indices | nonlinear.b.multi_indices)
    max_k = max((sum(k) for k in powers), default=0)
    rho_cap = max(1, max_k) * r_max + 1
    moments = MomentTable(n_max, rho_cap + 1)
    # z[k][:, lam] holds Z_k over all log weights rho for column lam
    z = {k: np.zeros((rho_cap + 1, n_max + 1)) for k in powers}
    a_entries = list(nonlinear.a.entries.items())
    b_entries = list(nonlinear.b.entries.items())
    t_minus_s = kernel.variant is LogVariant.T_MINUS_S
    notes: list[str] = []
    dropped = 0.0

    for n in range(n_max + 1):
        # contributions indexed by log power mu, allowing overflow past r_max
        acc = np.zeros((max(rho_cap + 2, xi.rmax + 1), dim))
        if n <= xi.order:
            acc[: xi.rmax + 1] += xi.coeffs[:, n]
        for (i, j, k), vec in a_entries:
            lam = n - i - j - 1
            if lam < 0:
                continue
            P = n - i - 1
            for rho in np.nonzero(z[k][:, lam])[0]:
                zk = z[k][rho, lam]
                for mu in range(rho + 1):
                    acc[mu] += math.comb(rho, mu) * moments.L[P, rho - mu] * zk * vec
        for (i, j, k), vec in b_entries:
            lam = n - i - j - 1
            if lam < 0:
                continue
            P = n - i - 1
            for rho in np.nonzero(z[k][:, lam])[0]:
                zk = z[k][rho, lam]
                for mu in range(rho + 1):
                    c = math.comb(rho, mu) * zk
                    if t_minus_s:
                        acc[mu] += c * moments.M[P, rho - mu] * vec
                        acc[mu + 1] += c * moments.L[P, rho - mu] * vec
                    else:
                        acc[mu] += c * moments.L[P, rho - mu + 1] * vec
        overflow = float(np.max(np.abs(acc[r_max + 1 :])))
        if overflow > 0.0:
            dropped = max(dropped, overflow)
            notes.append(f"column {n}: log powers above r_max={r_max} dropped (max norm {overflow:.3e})")
        X[:, n] = acc[: r_max + 1]
        for k in powers:
            if any(k):
                col = power_coefficients_2d(k, X, rho_cap, n)[:, n]
                z[k][:, n] = col
            elif n == 0:
                z[k][0, 0] = 1.0
    for note in notes:
        log.warning(note)
    return LogSolution(LogTable(X), notes, dropped)
