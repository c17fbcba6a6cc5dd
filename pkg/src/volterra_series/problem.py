"""Problem description, JSON problem files and solver dispatch.

A problem file is one JSON object::

    {
      "dim": 1,
      "kind": "second-kind",                  # or "first-kind"
      "linearity": "linear",                  # or "nonlinear"
      "singularity": {"type": "abel", "alpha": "1/2"},
      "kernel": {"a": [], "b": [{"i": 0, "j": 0, "value": [[1.0]]}]},
      "xi": [{"r": 0, "i": 0, "value": [1.0]}],
      "truncation": {"n_max": 20, "r_max": 20, "m_max": 64},
      "validation": {"t_points": [0.1, 0.25], "grid_steps": 4096}
    }

``singularity`` is ``{"type": "none"}``, ``{"type": "abel", "alpha": "p/q"}``,
``{"type": "abel", "alpha": 0.7071, "irrational": true}`` or
``{"type": "log", "variant": "t-minus-s" | "ln-ratio"}``. Regular kernels are
a plain entry list; singular kernels split into parts ``a`` and ``b``.
Linear entries are ``{"i", "j", "value": NxN}``, nonlinear entries
``{"i", "j", "k": [..], "value": N}``. Linear parts also accept generators::

    {"generator": "constant", "matrix": NxN}
    {"generator": "polynomial", "coefficients": [[c00, c01, ..], [c10, ..]], "matrix": NxN}
    {"generator": "exp", "a": 1.0, "b": 0.0, "degree": 20, "matrix": NxN}

``matrix`` defaults to the identity. ``xi`` is an entry list or one of
``{"generator": "constant", "value": N}``,
``{"generator": "polynomial", "coefficients": [N, N, ..]}``,
``{"generator": "exp", "a": 1.0, "degree": 20, "value": N}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .abel import (
    solve_abel_linear_irrational,
    solve_abel_linear_rational_direct,
    solve_abel_nonlinear,
)
from .errors import InvalidArgumentError, ProblemFormatError
from .firstkind import solve_first_kind
from .kernels import (
    AbelKernelExpansion,
    LinearKernelExpansion,
    LogKernelExpansion,
    LogVariant,
    NonlinearKernelExpansion,
    exp_kernel,
)
from .logarithmic import solve_log_system
from .regular import solve_linear_second_kind, solve_nonlinear_second_kind
from .series import AbelTable, AlphaExponent, LogTable, Series, TaylorTable

DEFAULT_N_MAX = 20
DEFAULT_M_MAX = 64
DEFAULT_GRID_STEPS = 4096
DEFAULT_T_POINTS = (0.05, 0.1, 0.2)


@dataclass(frozen=True)
class Problem:
    """A second- or first-kind problem with its truncation and validation settings."""

    kernel: Any
    xi: Series
    kind: str = "second-kind"
    n_max: int = DEFAULT_N_MAX
    r_max: int | None = None
    m_max: int = DEFAULT_M_MAX
    t_points: tuple[float, ...] = DEFAULT_T_POINTS
    grid_steps: int = DEFAULT_GRID_STEPS

    def __post_init__(self):
        if self.kind not in ("second-kind", "first-kind"):
            raise InvalidArgumentError(f"unknown kind {self.kind!r}")
        if self.kind == "first-kind" and not isinstance(self.kernel, LinearKernelExpansion):
            raise InvalidArgumentError("first-kind problems need a regular linear kernel")
        if self.kernel.dim != self.xi.dim:
            raise InvalidArgumentError(
                f"kernel dimension {self.kernel.dim} != forcing dimension {self.xi.dim}"
            )
        object.__setattr__(self, "t_points", tuple(float(t) for t in self.t_points))

    @property
    def dim(self) -> int:
        return self.kernel.dim

    @property
    def singularity(self) -> str:
        if isinstance(self.kernel, AbelKernelExpansion):
            return "abel"
        if isinstance(self.kernel, LogKernelExpansion):
            return "log"
        return "none"

    @property
    def is_linear(self) -> bool:
        if self.singularity == "none":
            return isinstance(self.kernel, LinearKernelExpansion)
        return self.kernel.is_linear

    @property
    def rows(self) -> int:
        """Row bound used by the irrational Abel and log solvers."""
        return self.n_max if self.r_max is None else self.r_max

    def with_truncation(self, n_max: int | None = None, r_max: int | None = None) -> "Problem":
        return Problem(
            self.kernel,
            self.xi,
            self.kind,
            self.n_max if n_max is None else n_max,
            self.r_max if r_max is None else r_max,
            self.m_max,
            self.t_points,
            self.grid_steps,
        )


@dataclass
class Solution:
    """Solver output plus any truncation warnings and diagnostics."""

    table: Series
    warnings: list[str] = field(default_factory=list)
    diagnostics: dict[str, Any] = field(default_factory=dict)


def solve_problem(problem: Problem) -> Solution:
    """Dispatch on kind, linearity and singularity."""
    kernel, xi, n = problem.kernel, problem.xi, problem.n_max
    if problem.kind == "first-kind":
        res = solve_first_kind(kernel, xi, n)
        return Solution(res.table, diagnostics={"j0": res.j0, "checked_up_to": res.checked_up_to})
    if problem.singularity == "none":
        if problem.is_linear:
            return Solution(solve_linear_second_kind(kernel, xi, n))
        return Solution(solve_nonlinear_second_kind(kernel, xi, n))
    if problem.singularity == "abel":
        if not kernel.alpha.is_rational:
            if problem.is_linear:
                return Solution(solve_abel_linear_irrational(kernel, xi, n, problem.rows))
            return Solution(solve_abel_nonlinear(kernel, xi, n, problem.rows))
        if problem.is_linear:
            return Solution(solve_abel_linear_rational_direct(kernel, xi, n))
        return Solution(solve_abel_nonlinear(kernel, xi, n, m_max=problem.m_max))
    res = solve_log_system(kernel, xi, n, problem.rows)
    return Solution(res.table, warnings=list(res.warnings))


# -- file parsing --------------------------------------------------------------


class _Reader:
    """Field access that reports the JSON path on failure."""

    def __init__(self, obj: Any, path: str):
        self.obj = obj
        self.path = path

    def fail(self, message: str) -> ProblemFormatError:
        return ProblemFormatError(f"{self.path}: {message}")

    def require(self, key: str, kind=None) -> Any:
        if not isinstance(self.obj, dict):
            raise self.fail("expected an object")
        if key not in self.obj:
            raise self.fail(f"missing field {key!r}")
        return self.get(key, kind=kind)

    def get(self, key: str, default: Any = None, kind=None) -> Any:
        if not isinstance(self.obj, dict):
            raise self.fail("expected an object")
        value = self.obj.get(key, default)
        if kind is not None and value is not None and not isinstance(value, kind):
            raise ProblemFormatError(f"{self.path}.{key}: expected {_kind_name(kind)}")
        return value

    def child(self, key: str) -> "_Reader":
        return _Reader(self.require(key), f"{self.path}.{key}")


def _kind_name(kind) -> str:
    kinds = kind if isinstance(kind, tuple) else (kind,)
    return " or ".join(k.__name__ for k in kinds)


def _index(entry: _Reader, key: str, default: int | None = None) -> int:
    value = entry.get(key, default)
    if value is None:
        raise entry.fail(f"missing field {key!r}")
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise entry.fail(f"{key!r} must be a nonnegative integer, got {value!r}")
    return value


def _array(entry: _Reader, key: str, shape: tuple[int, ...], default=None) -> np.ndarray:
    value = entry.get(key, default)
    if value is None:
        raise entry.fail(f"missing field {key!r}")
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise entry.fail(f"{key!r} must be numeric") from None
    if arr.shape == () and shape in ((1,), (1, 1)):
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise entry.fail(f"{key!r} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise entry.fail(f"{key!r} must be finite")
    return arr


def _linear_part(reader: _Reader, dim: int) -> LinearKernelExpansion:
    items = reader.obj
    if not isinstance(items, list):
        raise reader.fail("expected a list of kernel entries")
    entries: dict[tuple[int, int], np.ndarray] = {}

    def add(key, mat):
        entries[key] = entries.get(key, np.zeros((dim, dim))) + mat

    for pos, raw in enumerate(items):
        entry = _Reader(raw, f"{reader.path}[{pos}]")
        generator = entry.get("generator", kind=str)
        if generator is None:
            add((_index(entry, "i"), _index(entry, "j")), _array(entry, "value", (dim, dim)))
            if entry.get("k") is not None:
                raise entry.fail("'k' given for a linear kernel")
            continue
        mat = _array(entry, "matrix", (dim, dim), default=np.eye(dim).tolist())
        if generator == "constant":
            add((0, 0), mat)
        elif generator == "polynomial":
            coeffs = entry.require("coefficients", kind=list)
            for i, row in enumerate(coeffs):
                if not isinstance(row, list):
                    raise entry.fail("'coefficients' must be a list of lists")
                for j, c in enumerate(row):
                    if not isinstance(c, (int, float)) or isinstance(c, bool) or not math.isfinite(c):
                        raise entry.fail(f"coefficient [{i}][{j}] must be a finite number")
                    if c:
                        add((i, j), c * mat)
        elif generator == "exp":
            a = float(entry.get("a", 0.0, kind=(int, float)))
            b = float(entry.get("b", 0.0, kind=(int, float)))
            degree = _index(entry, "degree", DEFAULT_N_MAX)
            for key, value in exp_kernel(a, b, degree, mat, dim).entries.items():
                add(key, value)
        else:
            raise entry.fail(f"unknown generator {generator!r} (constant, polynomial, exp)")
    return LinearKernelExpansion(dim, entries)


def _nonlinear_part(reader: _Reader, dim: int) -> NonlinearKernelExpansion:
    items = reader.obj
    if not isinstance(items, list):
        raise reader.fail("expected a list of kernel entries")
    entries: dict = {}
    for pos, raw in enumerate(items):
        entry = _Reader(raw, f"{reader.path}[{pos}]")
        if entry.get("generator") is not None:
            raise entry.fail("generators are available for linear kernels only")
        k = entry.require("k", kind=list)
        if len(k) != dim or any(isinstance(e, bool) or not isinstance(e, int) or e < 0 for e in k):
            raise entry.fail(f"'k' must be {dim} nonnegative integers")
        key = (_index(entry, "i"), _index(entry, "j"), tuple(k))
        entries[key] = entries.get(key, np.zeros(dim)) + _array(entry, "value", (dim,))
    return NonlinearKernelExpansion(dim, entries)


def _xi_entries(reader: _Reader, dim: int) -> dict[tuple[int, int], np.ndarray]:
    obj = reader.obj
    out: dict[tuple[int, int], np.ndarray] = {}
    if isinstance(obj, dict):
        generator = reader.require("generator", kind=str)
        if generator == "constant":
            out[(0, 0)] = _array(reader, "value", (dim,))
        elif generator == "polynomial":
            coeffs = reader.require("coefficients", kind=list)
            for i, value in enumerate(coeffs):
                holder = _Reader({"value": value}, f"{reader.path}.coefficients[{i}]")
                out[(0, i)] = _array(holder, "value", (dim,))
        elif generator == "exp":
            a = float(reader.get("a", 1.0, kind=(int, float)))
            degree = _index(reader, "degree", DEFAULT_N_MAX)
            value = _array(reader, "value", (dim,), default=[1.0] * dim)
            for i in range(degree + 1):
                out[(0, i)] = value * a**i / math.factorial(i)
        else:
            raise reader.fail(f"unknown generator {generator!r} (constant, polynomial, exp)")
        return out
    if not isinstance(obj, list):
        raise reader.fail("expected a list of entries or a generator object")
    for pos, raw in enumerate(obj):
        entry = _Reader(raw, f"{reader.path}[{pos}]")
        key = (_index(entry, "r", 0), _index(entry, "i"))
        out[key] = out.get(key, np.zeros(dim)) + _array(entry, "value", (dim,))
    return out


def _build_xi(reader: _Reader, dim: int, singularity: str, alpha: AlphaExponent | None) -> Series:
    entries = _xi_entries(reader, dim)
    order = max((i for _, i in entries), default=0)
    rmax = max((r for r, _ in entries), default=0)
    if singularity == "none":
        if rmax > 0:
            raise reader.fail("row index r must be 0 without a singularity")
        arr = np.zeros((order + 1, dim))
        for (_, i), vec in entries.items():
            arr[i] = vec
        return TaylorTable(arr)
    if singularity == "abel":
        for r, i in entries:
            if not alpha.admissible(r, i):
                raise reader.fail(f"entry (r={r}, i={i}) is not admissible: need i > r*alpha - 1")
            if alpha.is_rational and r >= alpha.q:
                raise reader.fail(f"entry (r={r}, i={i}): rational alpha={alpha} keeps rows r < {alpha.q}")
        return AbelTable(dim, alpha, order, rmax, entries)
    return LogTable.from_entries(dim, order, rmax, entries)


def parse_problem(data: Any) -> Problem:
    """Validate a decoded JSON object and build a :class:`Problem`."""
    root = _Reader(data, "$")
    if not isinstance(data, dict):
        raise root.fail("problem must be a JSON object")
    dim = _index(root, "dim")
    if dim < 1:
        raise root.fail("'dim' must be at least 1")
    kind = root.get("kind", "second-kind", kind=str)
    if kind not in ("second-kind", "first-kind"):
        raise root.fail(f"'kind' must be second-kind or first-kind, got {kind!r}")
    linearity = root.get("linearity", "linear", kind=str)
    if linearity not in ("linear", "nonlinear"):
        raise root.fail(f"'linearity' must be linear or nonlinear, got {linearity!r}")
    sing = _Reader(root.get("singularity", {"type": "none"}, kind=dict), "$.singularity")
    stype = sing.get("type", "none", kind=str)
    if stype not in ("none", "abel", "log"):
        raise sing.fail(f"'type' must be none, abel or log, got {stype!r}")
    if kind == "first-kind" and (linearity != "linear" or stype != "none"):
        raise root.fail("first-kind problems must be linear without a singularity")

    alpha = None
    if stype == "abel":
        raw_alpha = sing.require("alpha", kind=(str, int, float))
        try:
            alpha = AlphaExponent.parse(raw_alpha, irrational=bool(sing.get("irrational", False)))
        except InvalidArgumentError as exc:
            raise sing.fail(str(exc)) from None

    part = _linear_part if linearity == "linear" else _nonlinear_part
    if stype == "none":
        kernel = part(root.child("kernel"), dim)
    else:
        kreader = root.child("kernel")
        a = part(_Reader(kreader.get("a", []), "$.kernel.a"), dim)
        b = part(_Reader(kreader.get("b", []), "$.kernel.b"), dim)
        if stype == "abel":
            kernel = AbelKernelExpansion(dim, alpha, a, b)
        else:
            variant = sing.get("variant", "t-minus-s", kind=str)
            try:
                kernel = LogKernelExpansion(dim, LogVariant(variant), a, b)
            except ValueError:
                raise sing.fail(f"'variant' must be t-minus-s or ln-ratio, got {variant!r}") from None

    xi = _build_xi(root.child("xi"), dim, stype, alpha)

    trunc = _Reader(root.get("truncation", {}, kind=dict), "$.truncation")
    n_max = _index(trunc, "n_max", DEFAULT_N_MAX)
    r_max = trunc.get("r_max")
    if r_max is not None:
        r_max = _index(trunc, "r_max")
    m_max = _index(trunc, "m_max", DEFAULT_M_MAX)

    val = _Reader(root.get("validation", {}, kind=dict), "$.validation")
    t_points = val.get("t_points", list(DEFAULT_T_POINTS), kind=list)
    if not t_points or any(
        isinstance(t, bool) or not isinstance(t, (int, float)) or not t > 0 for t in t_points
    ):
        raise val.fail("'t_points' must be a nonempty list of positive numbers")
    grid_steps = _index(val, "grid_steps", DEFAULT_GRID_STEPS)
    if grid_steps < 4:
        raise val.fail("'grid_steps' must be at least 4")
    try:
        return Problem(kernel, xi, kind, n_max, r_max, m_max, tuple(t_points), grid_steps)
    except InvalidArgumentError as exc:
        raise root.fail(str(exc)) from None


def load_problem(path: str) -> Problem:
    """Read and validate a JSON problem file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFormatError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return parse_problem(data)
    except ProblemFormatError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from None
