"""Small input checks used across modules."""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .errors import InvalidArgumentError


def check_nonneg_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise InvalidArgumentError(f"{name} must be nonnegative, got {value}")
    return int(value)


def check_positive_int(value: Any, name: str) -> int:
    value = check_nonneg_int(value, name)
    if value == 0:
        raise InvalidArgumentError(f"{name} must be positive")
    return value


def check_multi_index(k: Any, dim: int) -> tuple[int, ...]:
    """Return ``k`` as a tuple of nonnegative ints of length ``dim``."""
    try:
        k = tuple(k)
    except TypeError:
        raise InvalidArgumentError(f"multi-index must be a sequence, got {k!r}") from None
    if len(k) != dim:
        raise InvalidArgumentError(
            f"multi-index {k} has length {len(k)}, expected dimension {dim}"
        )
    return tuple(check_nonneg_int(e, "multi-index entry") for e in k)


def as_vector(value: Any, dim: int, name: str = "value") -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape != (dim,):
        raise InvalidArgumentError(f"{name} must have {dim} components, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite components")
    arr.flags.writeable = False
    return arr


def as_matrix(value: Any, dim: int, name: str = "value") -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim == 0 and dim == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (dim, dim):
        raise InvalidArgumentError(f"{name} must be {dim}x{dim}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def check_finite_positive(value: float, name: str) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise InvalidArgumentError(f"{name} must be positive and finite, got {value}")
    return value
