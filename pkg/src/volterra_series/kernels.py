"""Sparse double/triple power-series expansions of integral-equation kernels."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from math import factorial
from typing import Mapping, Union

import numpy as np

from ._validation import as_matrix, as_vector, check_multi_index, check_nonneg_int, check_positive_int
from .errors import InvalidArgumentError
from .series import AlphaExponent


@dataclass(frozen=True)
class LinearKernelExpansion:
    """``k(t, s) = sum_{i,j} t**i s**j K_ij`` with ``N x N`` matrices ``K_ij``."""

    dim: int
    entries: Mapping[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        check_positive_int(self.dim, "dim")
        frozen = {}
        for key, value in self.entries.items():
            i, j = (check_nonneg_int(e, "kernel index") for e in key)
            mat = as_matrix(value, self.dim, f"K{(i, j)}")
            if np.any(mat != 0.0):
                frozen[(i, j)] = mat
        object.__setattr__(self, "entries", MappingProxyType(frozen))

    def get(self, i: int, j: int) -> np.ndarray:
        mat = self.entries.get((i, j))
        return np.zeros((self.dim, self.dim)) if mat is None else mat

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.entries), default=0)

    def is_zero(self) -> bool:
        return not self.entries


@dataclass(frozen=True)
class NonlinearKernelExpansion:
    """``f(t, s, x) = sum t**i s**j x**k F_ijk`` with vectors ``F_ijk``.

    Keys are ``(i, j, k)`` where ``k`` is a multi-index tuple of length ``dim``.
    """

    dim: int
    entries: Mapping[tuple[int, int, tuple[int, ...]], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        check_positive_int(self.dim, "dim")
        frozen = {}
        for key, value in self.entries.items():
            i, j, k = key
            i = check_nonneg_int(i, "kernel index i")
            j = check_nonneg_int(j, "kernel index j")
            k = check_multi_index(k, self.dim)
            vec = as_vector(value, self.dim, f"F{(i, j, k)}")
            if np.any(vec != 0.0):
                frozen[(i, j, k)] = vec
        object.__setattr__(self, "entries", MappingProxyType(frozen))

    @classmethod
    def from_linear(cls, kernel: LinearKernelExpansion) -> "NonlinearKernelExpansion":
        """Embed a linear kernel: ``F_{i,j,e_m}`` is column ``m`` of ``K_ij``."""
        entries = {}
        for (i, j), mat in kernel.entries.items():
            for m in range(kernel.dim):
                unit = tuple(int(c == m) for c in range(kernel.dim))
                entries[(i, j, unit)] = mat[:, m]
        return cls(kernel.dim, entries)

    @property
    def multi_indices(self) -> frozenset:
        return frozenset(k for _, _, k in self.entries)

    def is_zero(self) -> bool:
        return not self.entries


AnyKernel = Union[LinearKernelExpansion, NonlinearKernelExpansion]


def _check_pair(a: AnyKernel, b: AnyKernel, dim: int) -> None:
    if type(a) is not type(b):
        raise InvalidArgumentError("regular and singular parts must both be linear or both nonlinear")
    if a.dim != dim or b.dim != dim:
        raise InvalidArgumentError("kernel part dimension mismatch")


@dataclass(frozen=True)
class AbelKernelExpansion:
    """``f = a(t, s, x) + (t - s)**(-alpha) b(t, s, x)``."""

    dim: int
    alpha: AlphaExponent
    a: AnyKernel
    b: AnyKernel

    def __post_init__(self):
        _check_pair(self.a, self.b, self.dim)

    @property
    def is_linear(self) -> bool:
        return isinstance(self.a, LinearKernelExpansion)

    @classmethod
    def linear(cls, alpha: AlphaExponent, a: Mapping, b: Mapping, dim: int = 1) -> "AbelKernelExpansion":
        return cls(dim, alpha, LinearKernelExpansion(dim, a), LinearKernelExpansion(dim, b))

    def as_nonlinear(self) -> "AbelKernelExpansion":
        if not self.is_linear:
            return self
        return AbelKernelExpansion(
            self.dim,
            self.alpha,
            NonlinearKernelExpansion.from_linear(self.a),
            NonlinearKernelExpansion.from_linear(self.b),
        )


class LogVariant(Enum):
    T_MINUS_S = "t-minus-s"
    LN_RATIO = "ln-ratio"


@dataclass(frozen=True)
class LogKernelExpansion:
    """``f = a + w(t, s) b`` with ``w = ln(t - s)`` or ``w = ln s - ln t``."""

    dim: int
    variant: LogVariant
    a: AnyKernel
    b: AnyKernel

    def __post_init__(self):
        _check_pair(self.a, self.b, self.dim)
        object.__setattr__(self, "variant", LogVariant(self.variant))

    @property
    def is_linear(self) -> bool:
        return isinstance(self.a, LinearKernelExpansion)

    def as_nonlinear(self) -> "LogKernelExpansion":
        if not self.is_linear:
            return self
        return LogKernelExpansion(
            self.dim,
            self.variant,
            NonlinearKernelExpansion.from_linear(self.a),
            NonlinearKernelExpansion.from_linear(self.b),
        )


def scalar_linear(entries: Mapping[tuple[int, int], float]) -> LinearKernelExpansion:
    """Convenience constructor for ``N = 1`` kernels from plain floats."""
    return LinearKernelExpansion(1, {key: [[value]] for key, value in entries.items()})


def exp_kernel(a: float, b: float, degree: int, matrix=None, dim: int = 1) -> LinearKernelExpansion:
    """Taylor coefficients of ``exp(a*t + b*s) * matrix`` up to total degree."""
    mat = np.eye(dim) if matrix is None else np.asarray(matrix, dtype=float)
    entries = {}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            entries[(i, j)] = (a**i * b**j / (factorial(i) * factorial(j))) * mat
    return LinearKernelExpansion(dim, entries)
