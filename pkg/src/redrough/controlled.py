"""Controlled paths ``(Y, Y')`` relative to a reduced rough path.

``Y`` takes values of any shape ``vshape`` and ``Y'`` values of shape
``vshape + (d,)``; the trailing axis of ``Y'`` acts on increments of the
driver.  The remainder ``R[s,t] = Y[s,t] - Y'_s X[s,t]`` is never stored; it
is produced diagonal by diagonal when a seminorm is requested.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BaseMismatch, BoundPreconditionViolated, DimensionMismatch
from .functions import SmoothFunction
from .grid import GridPath, TwoParamField, holder_seminorm, sup_norm, two_param_seminorm
from .rough_path import ReducedRoughPath
from .tensor import frob

SCHEMA = "redrough.controlled_path/1"


def act(lin: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Contract the trailing axis of ``lin`` (shape ``(m, *vshape, d)``) with ``v`` (shape ``(m, d)``)."""
    extra = lin.ndim - v.ndim
    return np.einsum("...d,...d->...", lin, v.reshape(v.shape[:1] + (1,) * extra + v.shape[1:]))


@dataclass(frozen=True)
class ControlledNorms:
    y_prime_alpha: float
    remainder_2alpha: float
    seminorm: float
    full_norm: float
    y0: float
    y_prime0: float


class ControlledPath:
    def __init__(self, base: ReducedRoughPath, y, y_prime):
        y = np.array(y, dtype=np.float64)
        y_prime = np.array(y_prime, dtype=np.float64)
        n = base.grid.times.size
        if y.ndim == 1:
            y = y[:, None]
            if y_prime.ndim == 1 and base.dim == 1:
                y_prime = y_prime[:, None, None]
            elif y_prime.ndim == 2:
                y_prime = y_prime[:, None, :]
        if y.shape[0] != n or y_prime.shape[0] != n:
            raise DimensionMismatch("Y and Y' must be sampled on the base grid")
        if y_prime.shape[1:] != y.shape[1:] + (base.dim,):
            raise DimensionMismatch(
                f"Y' must have value shape {y.shape[1:] + (base.dim,)}, got {y_prime.shape[1:]}"
            )
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(y_prime))):
            raise ValueError("controlled path values must be finite")
        y.setflags(write=False)
        y_prime.setflags(write=False)
        self.base = base
        self.y = y
        self.y_prime = y_prime

    @property
    def grid(self):
        return self.base.grid

    @property
    def vshape(self) -> tuple[int, ...]:
        return self.y.shape[1:]

    def require_base(self, r: ReducedRoughPath) -> None:
        if self.base is not r and self.base.content_hash() != r.content_hash():
            raise BaseMismatch("controlled path is not controlled by this rough path")

    def remainder(self, i: int, j: int) -> np.ndarray:
        self.grid.check_pair(i, j)
        dx = self.base.increment(i, j)
        return self.y[j] - self.y[i] - act(self.y_prime[i : i + 1], dx[None])[0]

    def remainder_diagonal(self, k: int) -> np.ndarray:
        x = self.base.x
        return self.y[k:] - self.y[:-k] - act(self.y_prime[:-k], x[k:] - x[:-k])

    def remainder_field(self) -> TwoParamField:
        return TwoParamField(self.grid, self.remainder_diagonal, len(self.vshape))

    def y_path(self) -> GridPath:
        return GridPath(self.grid, self.y)

    def y_prime_path(self) -> GridPath:
        return GridPath(self.grid, self.y_prime)

    def restrict(self, a: int, b: int) -> ControlledPath:
        return ControlledPath(self.base.restrict(a, b), self.y[a : b + 1], self.y_prime[a : b + 1])

    def __sub__(self, other: ControlledPath) -> ControlledPath:
        other.require_base(self.base)
        return ControlledPath(self.base, self.y - other.y, self.y_prime - other.y_prime)

    def __add__(self, other: ControlledPath) -> ControlledPath:
        other.require_base(self.base)
        return ControlledPath(self.base, self.y + other.y, self.y_prime + other.y_prime)

    def scaled(self, c: float) -> ControlledPath:
        return ControlledPath(self.base, c * self.y, c * self.y_prime)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "base_hash": self.base.content_hash(),
            "y": self.y.tolist(),
            "y_prime": self.y_prime.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict, base: ReducedRoughPath) -> ControlledPath:
        if doc.get("base_hash") != base.content_hash():
            raise BaseMismatch("serialised controlled path belongs to a different rough path")
        return cls(base, doc["y"], doc["y_prime"])


def identity_path(r: ReducedRoughPath) -> ControlledPath:
    """``(X, Id)``: the driver itself as a controlled path."""
    d = r.dim
    return ControlledPath(r, r.x, np.broadcast_to(np.eye(d), (r.x.shape[0], d, d)))


def lift_function(f: SmoothFunction, r: ReducedRoughPath) -> ControlledPath:
    """``(F(X), DF(X))``, i.e. ``F`` composed with the identity path."""
    return compose(f, identity_path(r))


def controlled_norms(c: ControlledPath, budget: str = "auto", alpha: float | None = None) -> ControlledNorms:
    a = c.base.alpha if alpha is None else alpha
    yp = holder_seminorm(c.y_prime_path(), a, budget).seminorm
    rem = two_param_seminorm(c.remainder_field(), 2 * a, budget).seminorm
    y0 = float(frob(c.y[0], len(c.vshape)))
    yp0 = float(frob(c.y_prime[0], len(c.vshape) + 1))
    semi = yp + rem
    return ControlledNorms(yp, rem, semi, semi + y0 + yp0, y0, yp0)


def compose(f: SmoothFunction, c: ControlledPath) -> ControlledPath:
    """``F(Y) = (F(Y), DF(Y) Y')``."""
    if c.vshape != (f.domain_dim,):
        raise DimensionMismatch(f"{f.name} expects inputs of dimension {f.domain_dim}, path has shape {c.vshape}")
    val = f.derivative(0, c.y)
    jac = f.derivative(1, c.y)
    deriv = np.einsum("m...l,mld->m...d", jac, c.y_prime)
    return ControlledPath(c.base, val, deriv)


def _driver_alpha_norm(c: ControlledPath, alpha: float, budget: str) -> float:
    return holder_seminorm(c.base.path, alpha, budget).seminorm


def compose_norm_bound(
    f: SmoothFunction, c: ControlledPath, m: float | None = None, budget: str = "auto", alpha: float | None = None
) -> float:
    """Right-hand side of the composition estimate for ``F(Y)``.

    ``C M ||F||_{C^2_b} (1 + ||X||)^2 (|Y'_0| + ||Y, Y'||)`` with
    ``C = 2 (1 + T^a + T^{2a}) (1 + M)``.  The constant dominates the chain
    of inequalities in the estimate whenever ``|Y'_0| + ||Y, Y'|| <= M``,
    which is therefore required.
    """
    a = c.base.alpha if alpha is None else alpha
    norms = controlled_norms(c, budget, a)
    load = norms.y_prime0 + norms.seminorm
    if m is None:
        m = max(1.0, load)
    if m < 1.0:
        raise BoundPreconditionViolated(f"M must be at least 1, got {m}")
    if load > m * (1 + 1e-12):
        raise BoundPreconditionViolated(f"|Y'_0| + seminorm = {load:.6g} exceeds M = {m:.6g}")
    lo = c.y.min(axis=0)
    hi = c.y.max(axis=0)
    cb = f.cb_norm(2, center=0.5 * (lo + hi), radius=max(1e-12, 0.5 * float(np.linalg.norm(hi - lo)))).total
    t = c.grid.horizon
    xa = _driver_alpha_norm(c, a, budget)
    const = 2.0 * (1.0 + t**a + t ** (2 * a)) * (1.0 + m)
    return const * m * cb * (1.0 + xa) ** 2 * load


def _scalar_values(c: ControlledPath) -> tuple[np.ndarray, np.ndarray]:
    if c.vshape not in ((), (1,)):
        raise DimensionMismatch(f"expected a scalar controlled path, got value shape {c.vshape}")
    return c.y.reshape(-1), c.y_prime.reshape(c.y.shape[0], -1)


def leibniz_product(a: ControlledPath, b: ControlledPath) -> ControlledPath:
    """Pointwise product of a scalar path ``a`` with a path ``b``: ``U = a b``, ``U' = a b' + b (x) a'``."""
    b.require_base(a.base)
    ay, ayp = _scalar_values(a)
    extra = (None,) * len(b.vshape)
    u = ay[(slice(None),) + extra] * b.y
    up = ay[(slice(None),) + extra + (None,)] * b.y_prime + b.y[..., None] * ayp[(slice(None),) + extra]
    return ControlledPath(a.base, u, up)


def leibniz_constant(t: float, alpha: float, x_alpha: float) -> float:
    """``5 (1 + T^a + T^{2a})^2 (1 + ||X||_a)^2``.

    Follows from the product estimates after bounding sup norms through the
    Hölder norms; it is quadratic in ``||X||`` because the remainder of a
    product contains ``Y[s,t] Z[s,t]``.
    """
    k = 1.0 + t**alpha + t ** (2 * alpha)
    return 5.0 * k * k * (1.0 + x_alpha) ** 2


def leibniz_norm_bound(a: ControlledPath, b: ControlledPath, budget: str = "auto", alpha: float | None = None) -> float:
    b.require_base(a.base)
    al = a.base.alpha if alpha is None else alpha
    na = controlled_norms(a, budget, al)
    nb = controlled_norms(b, budget, al)
    xa = _driver_alpha_norm(a, al, budget)
    c = leibniz_constant(a.grid.horizon, al, xa)
    return c * (na.y0 + na.y_prime0 + na.seminorm) * (nb.y0 + nb.y_prime0 + nb.seminorm)


def y_sup(c: ControlledPath) -> float:
    return sup_norm(c.y_path())


def y_prime_sup(c: ControlledPath) -> float:
    return sup_norm(c.y_prime_path())


def save_json(path: str | Path, c: ControlledPath) -> None:
    Path(path).write_text(json.dumps(c.to_json(), sort_keys=True, indent=1) + "\n", encoding="utf-8")


def load_json(path: str | Path, base: ReducedRoughPath) -> ControlledPath:
    return ControlledPath.from_json(json.loads(Path(path).read_text(encoding="utf-8")), base)
