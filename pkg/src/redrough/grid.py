"""Sampled paths, two-parameter fields and empirical Hölder seminorms."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, GridMismatch, IndexOutOfRange, InvalidExponent
from .tensor import frob

ALL_PAIRS_LIMIT = 4096
POLICIES = ("auto", "all", "dyadic")


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing times ``0 = t_0 < ... < t_N = T``."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a grid needs at least two time points")
        if t[0] != 0.0:
            raise ValueError(f"grid must start at 0, got t_0 = {t[0]}")
        if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
            raise ValueError("grid times must be finite and strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, n: int, horizon: float = 1.0) -> Grid:
        if n < 1:
            raise ValueError("need at least one step")
        t = np.linspace(0.0, horizon, n + 1)
        return cls(t)

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def mesh(self) -> float:
        return float(np.max(np.diff(self.times)))

    def restrict(self, a: int, b: int) -> Grid:
        """Sub-grid on indices ``a..b`` shifted to start at time 0."""
        self.check_pair(a, b)
        if a == b:
            raise IndexOutOfRange("a window needs at least one step")
        return Grid(self.times[a : b + 1] - self.times[a])

    def check_index(self, i: int) -> None:
        if not 0 <= i <= self.n_steps:
            raise IndexOutOfRange(f"grid index {i} outside 0..{self.n_steps}")

    def check_pair(self, i: int, j: int) -> None:
        self.check_index(i)
        self.check_index(j)
        if i > j:
            raise IndexOutOfRange(f"expected i <= j, got ({i}, {j})")

    def same_as(self, other: Grid) -> bool:
        return self is other or np.array_equal(self.times, other.times)


def require_same_grid(a: Grid, b: Grid) -> None:
    if not a.same_as(b):
        raise GridMismatch("objects live on different grids")


@dataclass(frozen=True, eq=False)
class GridPath:
    """Values of a path at every grid time; ``values`` has shape ``(N+1, *shape)``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape[0] != self.grid.times.size:
            raise DimensionMismatch(
                f"{v.shape[0]} values for a grid of {self.grid.times.size} points"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]

    @property
    def value_axes(self) -> int:
        return self.values.ndim - 1

    def increment(self, i: int, j: int) -> np.ndarray:
        self.grid.check_pair(i, j)
        return self.values[j] - self.values[i]

    def increments(self, k: int) -> np.ndarray:
        """All increments over ``k`` steps, ``values[i+k] - values[i]``."""
        return self.values[k:] - self.values[:-k]

    def scaled(self, c: float) -> GridPath:
        return GridPath(self.grid, c * self.values)

    def restrict(self, a: int, b: int) -> GridPath:
        return GridPath(self.grid.restrict(a, b), self.values[a : b + 1])


def increment(p: GridPath, i: int, j: int) -> np.ndarray:
    return p.increment(i, j)


class TwoParamField:
    """Values ``f(i, j)`` for grid index pairs ``i < j``.

    The field is described by a function returning a whole diagonal
    ``[f(i, i+k) for all i]`` at once; seminorm scans walk the diagonals.
    """

    def __init__(self, grid: Grid, diagonal: Callable[[int], np.ndarray], value_axes: int):
        self.grid = grid
        self._diagonal = diagonal
        self.value_axes = value_axes

    @classmethod
    def from_dense(cls, grid: Grid, table) -> TwoParamField:
        table = np.asarray(table, dtype=np.float64)
        n = grid.times.size
        if table.shape[:2] != (n, n):
            raise DimensionMismatch(f"dense table of shape {table.shape[:2]} for {n} grid points")
        idx = np.arange(n)

        def diag(k):
            return table[idx[:-k], idx[k:]]

        return cls(grid, diag, table.ndim - 2)

    def diagonal(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.grid.n_steps:
            raise IndexOutOfRange(f"diagonal offset {k} outside 1..{self.grid.n_steps}")
        return np.asarray(self._diagonal(k), dtype=np.float64)

    def value(self, i: int, j: int) -> np.ndarray:
        self.grid.check_pair(i, j)
        if i == j:
            raise IndexOutOfRange("two-parameter fields are indexed by i < j")
        return self.diagonal(j - i)[i]

    def __sub__(self, other: TwoParamField) -> TwoParamField:
        require_same_grid(self.grid, other.grid)
        return TwoParamField(
            self.grid, lambda k: self.diagonal(k) - other.diagonal(k), self.value_axes
        )


@dataclass(frozen=True)
class HolderReport:
    exponent: float
    seminorm: float
    argmax_pair: tuple[int, int]
    pair_budget: str
    pairs_scanned: int = field(default=0, compare=False)


def resolve_policy(budget: str, n_steps: int) -> str:
    if budget not in POLICIES:
        raise ValueError(f"unknown enumeration policy {budget!r}; choose from {POLICIES}")
    if budget == "auto":
        return "all" if n_steps <= ALL_PAIRS_LIMIT else "dyadic"
    return budget


def pair_offsets(policy: str, n_steps: int) -> list[int]:
    if policy == "all":
        return list(range(1, n_steps + 1))
    offsets = []
    k = 1
    while k <= n_steps:
        offsets.append(k)
        k *= 2
    if offsets[-1] != n_steps:
        offsets.append(n_steps)  # the full interval is always probed
    return offsets


def _scan(grid: Grid, diagonal, value_axes: int, exponent: float, budget: str) -> HolderReport:
    policy = resolve_policy(budget, grid.n_steps)
    t = grid.times
    best, best_pair, scanned = -1.0, (0, grid.n_steps), 0
    for k in pair_offsets(policy, grid.n_steps):
        vals = diagonal(k)
        norms = frob(vals, value_axes)
        h = t[k:] - t[:-k]
        q = norms * np.exp(-exponent * np.log(h))
        scanned += q.size
        i = int(np.argmax(q))
        qi = float(q[i])
        if qi > best or (qi == best and (i, i + k) < best_pair):
            best, best_pair = qi, (i, i + k)
    return HolderReport(exponent, max(best, 0.0), best_pair, policy, scanned)


def _check_exponent(alpha: float, upper: float) -> None:
    if not (0.0 < alpha <= upper) or math.isnan(alpha):
        raise InvalidExponent(f"Hölder exponent must lie in (0, {upper:g}], got {alpha}")


def holder_seminorm(p: GridPath, alpha: float, budget: str = "auto") -> HolderReport:
    """Empirical ``sup |p_t - p_s| / (t - s)^alpha`` over enumerated grid pairs."""
    _check_exponent(alpha, 1.0)
    return _scan(p.grid, p.increments, p.value_axes, alpha, budget)


def two_param_seminorm(f: TwoParamField, exponent: float, budget: str = "auto") -> HolderReport:
    _check_exponent(exponent, 2.0)
    return _scan(f.grid, f.diagonal, f.value_axes, exponent, budget)


def sup_norm(p: GridPath) -> float:
    return float(np.max(frob(p.values, p.value_axes)))


def sup_bound_from_holder(p: GridPath, alpha: float, budget: str = "auto") -> float:
    """``|p_0| + T^alpha ||p||_alpha``, an upper bound for ``max_i |p_i|``.

    Pairs anchored at the origin are always scanned so the bound holds for
    every enumeration policy.
    """
    _check_exponent(alpha, 1.0)
    semi = holder_seminorm(p, alpha, budget).seminorm
    t = p.grid.times[1:]
    anchored = frob(p.values[1:] - p.values[0], p.value_axes) * np.exp(-alpha * np.log(t))
    semi = max(semi, float(np.max(anchored)))
    y0 = float(frob(p.values[0], p.value_axes))
    bound = y0 + p.grid.horizon**alpha * semi
    assert bound >= sup_norm(p) - 1e-12 * max(1.0, bound)
    return bound


def write_path_csv(path: str | Path, p: GridPath) -> None:
    """Write ``t,x0,...`` rows; non-vector values are flattened row-major."""
    flat = p.values.reshape(p.values.shape[0], -1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{k}" for k in range(flat.shape[1])])
        for t, row in zip(p.grid.times, flat):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in row])


def read_path_csv(path: str | Path) -> GridPath:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "t":
        raise ValueError(f"{path}: expected header starting with 't'")
    data = np.array([[float(x) for x in r] for r in body], dtype=np.float64)
    return GridPath(Grid(data[:, 0]), data[:, 1:])
