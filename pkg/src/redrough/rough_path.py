"""Reduced rough paths: a sampled path together with a symmetric second level.

The second level is stored per grid step.  Values over longer intervals are
produced by folding the steps through the reduced Chen relation

    S[s,t] = S[s,u] + S[u,t] + Sym(X[s,u] (x) X[u,t]),

so every stored object satisfies the relation up to summation roundoff.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    ExponentMismatch,
    IndexOutOfRange,
    InvalidExponent,
    NonMonotoneTriple,
)
from .grid import Grid, GridPath, TwoParamField, holder_seminorm, require_same_grid, two_param_seminorm
from .tensor import as_sym, compensated_cumsum, compensated_sum, frob, outer, sym_outer, symmetrize

SCHEMA = "redrough.reduced_rough_path/1"
TOL_CHEN = 1e-10


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (1.0 / 3.0 < alpha <= 0.5):
        raise InvalidExponent(
            f"alpha = {alpha} is outside the reduced rough path regime (1/3, 1/2]"
        )
    return alpha


@dataclass(frozen=True)
class RrpNorms:
    x_alpha: float
    s_2alpha: float
    total: float


class ReducedRoughPath:
    """The pair ``(X, S)`` with ``X`` on a grid and ``S`` stored per step."""

    def __init__(self, alpha: float, path: GridPath, second_level_steps):
        self.alpha = check_alpha(alpha)
        if path.value_axes != 1:
            raise DimensionMismatch("the first level must be vector valued")
        steps = as_sym(second_level_steps)
        d = path.shape[0]
        if steps.shape != (path.grid.n_steps, d, d):
            raise DimensionMismatch(
                f"expected second level steps of shape {(path.grid.n_steps, d, d)}, got {steps.shape}"
            )
        steps.setflags(write=False)
        self.path = path
        self.steps = steps
        self._prefix = None
        self._hash = None

    @property
    def grid(self) -> Grid:
        return self.path.grid

    @property
    def dim(self) -> int:
        return self.path.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.path.values

    def increment(self, i: int, j: int) -> np.ndarray:
        return self.path.increment(i, j)

    def second_level(self, i: int, j: int) -> np.ndarray:
        """``S[t_i, t_j]`` obtained by folding the steps ``i..j-1``."""
        self.grid.check_pair(i, j)
        if i == j:
            raise IndexOutOfRange("the second level is indexed by i < j")
        if j == i + 1:
            return self.steps[i].copy()
        x = self.x
        rel = x[i:j] - x[i]
        dx = x[i + 1 : j + 1] - x[i:j]
        cross = compensated_sum(outer(rel, dx), axis=0)
        return compensated_sum(self.steps[i:j], axis=0) + symmetrize(cross)

    def _prefix_sums(self) -> np.ndarray:
        if self._prefix is None:
            xc = self.x - self.x[0]
            dx = np.diff(xc, axis=0)
            self._prefix = compensated_cumsum(self.steps + sym_outer(xc[:-1], dx), axis=0)
        return self._prefix

    def second_level_diagonal(self, k: int) -> np.ndarray:
        """``[S[t_i, t_{i+k}] for all i]`` in one vectorised pass."""
        if not 1 <= k <= self.grid.n_steps:
            raise IndexOutOfRange(f"offset {k} outside 1..{self.grid.n_steps}")
        if k == 1:
            return self.steps
        g = self._prefix_sums()
        xc = self.x - self.x[0]
        return g[k:] - g[:-k] - sym_outer(xc[:-k], xc[k:] - xc[:-k])

    def second_level_field(self) -> TwoParamField:
        return TwoParamField(self.grid, self.second_level_diagonal, 2)

    def chen_defect(self, i: int, j: int, k: int) -> float:
        if not i < j < k:
            raise NonMonotoneTriple(f"expected i < j < k, got ({i}, {j}, {k})")
        self.grid.check_pair(i, k)
        lhs = self.second_level(i, k) - self.second_level(i, j) - self.second_level(j, k)
        rhs = sym_outer(self.increment(i, j), self.increment(j, k))
        return float(frob(lhs - rhs, 2))

    def restrict(self, a: int, b: int) -> ReducedRoughPath:
        return ReducedRoughPath(self.alpha, self.path.restrict(a, b), self.steps[a:b])

    def with_alpha(self, alpha: float) -> ReducedRoughPath:
        return ReducedRoughPath(alpha, self.path, self.steps)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "alpha": self.alpha,
            "grid": self.grid.times.tolist(),
            "path": self.x.tolist(),
            "second_level_steps": self.steps.tolist(),
        }

    def content_hash(self) -> str:
        if self._hash is None:
            blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
            self._hash = hashlib.sha256(blob.encode()).hexdigest()
        return self._hash

    @classmethod
    def from_json(cls, doc: dict) -> ReducedRoughPath:
        grid = Grid(np.asarray(doc["grid"], dtype=np.float64))
        path = GridPath(grid, np.asarray(doc["path"], dtype=np.float64))
        return cls(doc["alpha"], path, np.asarray(doc["second_level_steps"], dtype=np.float64))


def trivial(grid: Grid, dim: int, alpha: float = 0.5) -> ReducedRoughPath:
    """The unit element: constant first level, vanishing second level."""
    return ReducedRoughPath(
        alpha, GridPath(grid, np.zeros((grid.times.size, dim))), np.zeros((grid.n_steps, dim, dim))
    )


def geometric_lift(x: GridPath, alpha: float) -> ReducedRoughPath:
    """Symmetric part of the piecewise-linear iterated integral: ``S = X (x) X / 2``."""
    check_alpha(alpha)
    dx = np.diff(x.values, axis=0)
    return ReducedRoughPath(alpha, x, 0.5 * outer(dx, dx))


def perturbed_lift(base: ReducedRoughPath, phi: GridPath) -> ReducedRoughPath:
    """Add the increments of a symmetric one-parameter path ``phi`` to ``S``."""
    require_same_grid(base.grid, phi.grid)
    d = base.dim
    if phi.shape != (d, d):
        raise DimensionMismatch(f"phi must take values of shape {(d, d)}, got {phi.shape}")
    vals = as_sym(phi.values)
    return ReducedRoughPath(base.alpha, base.path, base.steps + np.diff(vals, axis=0))


def ito_lift(x: GridPath, alpha: float) -> ReducedRoughPath:
    """Geometric lift corrected by ``phi_t = -t/2 Id``, the Itô enhancement of Brownian motion."""
    base = geometric_lift(x, alpha)
    d = base.dim
    phi = -0.5 * x.grid.times[:, None, None] * np.eye(d)
    return perturbed_lift(base, GridPath(x.grid, phi))


def _check_comparable(a: ReducedRoughPath, b: ReducedRoughPath) -> None:
    require_same_grid(a.grid, b.grid)
    if a.alpha != b.alpha:
        raise ExponentMismatch(f"alpha differs: {a.alpha} vs {b.alpha}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension differs: {a.dim} vs {b.dim}")


def rrp_distance(a: ReducedRoughPath, b: ReducedRoughPath, budget: str = "auto") -> float:
    """Inhomogeneous distance: first-level and second-level Hölder distances added."""
    _check_comparable(a, b)
    dx = GridPath(a.grid, a.x - b.x)
    first = holder_seminorm(dx, a.alpha, budget).seminorm
    second = two_param_seminorm(a.second_level_field() - b.second_level_field(), 2 * a.alpha, budget)
    return first + second.seminorm


def rrp_norm(r: ReducedRoughPath, budget: str = "auto", alpha: float | None = None) -> RrpNorms:
    a = r.alpha if alpha is None else alpha
    xa = holder_seminorm(r.path, a, budget).seminorm
    s2a = two_param_seminorm(r.second_level_field(), 2 * a, budget).seminorm
    return RrpNorms(xa, s2a, xa + s2a)


def validate_dense_second_level(x: GridPath, table, tol: float = TOL_CHEN):
    """Check the reduced Chen relation for a dense table ``table[i, j] = S[t_i, t_j]``.

    The triples ``(i, i+1, k)`` pin every entry to the per-step values, so
    they suffice.  The tolerance is scaled by the size of the compared terms.
    Returns ``(max_scaled_defect, worst_triple, ok)``.
    """
    table = np.asarray(table, dtype=np.float64)
    n = x.grid.times.size
    d = x.shape[0]
    if table.shape != (n, n, d, d):
        raise DimensionMismatch(f"dense table must have shape {(n, n, d, d)}, got {table.shape}")
    xv = x.values
    worst, worst_triple = 0.0, None
    for i in range(n - 2):
        ks = np.arange(i + 2, n)
        lhs = table[i, ks] - table[i, i + 1] - table[i + 1, ks]
        rhs = sym_outer(np.broadcast_to(xv[i + 1] - xv[i], (ks.size, d)), xv[ks] - xv[i + 1])
        scale = 1.0 + frob(table[i, ks], 2) + frob(table[i + 1, ks], 2)
        defect = frob(lhs - rhs, 2) / scale
        m = int(np.argmax(defect))
        if defect[m] > worst:
            worst, worst_triple = float(defect[m]), (i, i + 1, int(ks[m]))
    return worst, worst_triple, worst <= tol


def from_dense_table(alpha: float, x: GridPath, table, tol: float = TOL_CHEN) -> ReducedRoughPath:
    worst, triple, ok = validate_dense_second_level(x, table, tol)
    if not ok:
        raise ValueError(f"second level violates the reduced Chen relation at {triple} (defect {worst:.3e})")
    table = np.asarray(table, dtype=np.float64)
    idx = np.arange(x.grid.n_steps)
    return ReducedRoughPath(alpha, x, table[idx, idx + 1])


def save_json(path: str | Path, r: ReducedRoughPath) -> None:
    Path(path).write_text(json.dumps(r.to_json(), sort_keys=True, indent=1) + "\n", encoding="utf-8")


def load_json(path: str | Path) -> ReducedRoughPath:
    return ReducedRoughPath.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
