"""Smooth function models with analytic derivatives up to order three.

Evaluators take points of shape ``(..., n)`` and return arrays of shape
``(..., *codomain)`` for the value and ``(..., *codomain, n, ..., n)`` for the
derivatives, so whole paths are evaluated in one call.  Norms of values and
derivative tensors are Frobenius norms of the full arrays, which dominate
the corresponding operator norms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import DimensionMismatch, NonFiniteOutput, OrderUnavailable, UnknownField
from .tensor import frob

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CbNorm:
    per_order: tuple[float, ...]
    total: float
    probe_box: tuple[tuple[float, ...], float] | None
    probe_count: int


class SmoothFunction:
    """A map ``R^n -> R^codomain`` with derivatives up to ``order``.

    ``bounds`` are global sup-norm bounds per derivative order.  When given,
    the function is treated as a genuine C^m_b map; otherwise norms are
    estimated by probing a ball.
    """

    def __init__(
        self,
        name: str,
        domain_dim: int,
        codomain: tuple[int, ...],
        derivatives: list[Evaluator],
        bounds: list[float] | None = None,
    ):
        if not 2 <= len(derivatives) <= 4:
            raise ValueError("supply the value and between one and three derivatives")
        self.name = name
        self.domain_dim = int(domain_dim)
        self.codomain = tuple(codomain)
        self._derivs = list(derivatives)
        self.bounds = None if bounds is None else [float(b) for b in bounds]

    @property
    def order(self) -> int:
        return len(self._derivs) - 1

    @property
    def globally_bounded(self) -> bool:
        return self.bounds is not None and len(self.bounds) > self.order

    def _point(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if y.ndim == 0 or y.shape[-1] != self.domain_dim:
            raise DimensionMismatch(
                f"{self.name}: expected points with last axis {self.domain_dim}, got shape {y.shape}"
            )
        return y

    def __call__(self, y) -> np.ndarray:
        return self.derivative(0, y)

    def eval(self, y) -> np.ndarray:
        return self.derivative(0, y)

    def derivative(self, order: int, y) -> np.ndarray:
        if not 0 <= order <= self.order:
            raise OrderUnavailable(f"{self.name} provides derivatives up to order {self.order}")
        y = self._point(y)
        out = np.asarray(self._derivs[order](y), dtype=np.float64)
        expected = y.shape[:-1] + self.codomain + (self.domain_dim,) * order
        if out.shape != expected:
            out = np.broadcast_to(out, expected).copy()
        if not np.all(np.isfinite(out)):
            raise NonFiniteOutput(f"{self.name}: non-finite value at order {order}")
        return out

    def cb_norm(self, m: int | None = None, center=None, radius: float = 1.0, count: int = 256) -> CbNorm:
        """Sum of sup norms of ``F, DF, ..., D^m F``.

        Built-ins with analytic global bounds return them directly.  Other
        functions are probed on the ball ``|y - center| <= radius``.
        """
        m = self.order if m is None else m
        if m > self.order:
            raise OrderUnavailable(f"{self.name} provides derivatives up to order {self.order}")
        if self.bounds is not None and len(self.bounds) > m:
            per = tuple(self.bounds[: m + 1])
            return CbNorm(per, float(sum(per)), None, 0)
        c = np.zeros(self.domain_dim) if center is None else np.asarray(center, dtype=np.float64)
        pts = probe_points(c, radius, self.domain_dim, count)
        per = []
        for k in range(m + 1):
            vals = self.derivative(k, pts)
            per.append(float(np.max(frob(vals, vals.ndim - 1))))
        per = tuple(per)
        return CbNorm(per, float(sum(per)), (tuple(c.tolist()), float(radius)), len(pts))

    def sup_bounds(self, m: int, center=None, radius: float = 1.0) -> tuple[float, ...]:
        return self.cb_norm(m, center, radius).per_order


RADIUS_LADDER = tuple(k / 16 for k in range(1, 17)) + tuple(2.0**k for k in range(1, 11))


def probe_points(center, radius: float, n: int, count: int = 256) -> np.ndarray:
    """Deterministic probes filling the ball ``|y - center| <= radius``.

    Directions come from an unscrambled Halton sequence; radii are a fixed
    absolute ladder below ``radius`` plus ``radius`` itself, so a larger ball
    always contains the ladder probes of a smaller one.
    """
    center = np.asarray(center, dtype=np.float64)
    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        raw = qmc.Halton(d=n, scramble=False).random(count + 1)[1:] * 2.0 - 1.0
        norms = np.linalg.norm(raw, axis=1)
        raw = raw[norms > 1e-12]
        dirs = raw / np.linalg.norm(raw, axis=1)[:, None]
    radii = [r for r in RADIUS_LADDER if r < radius] + [radius]
    if n == 1:
        radii = sorted(set(radii) | set(np.linspace(0.0, radius, count + 1)[1:].tolist()))
    pts = [center[None, :]]
    for r in radii:
        pts.append(center + r * dirs)
    return np.concatenate(pts, axis=0)


def fd_check(f: SmoothFunction, order: int, probes, h: float = 1e-5) -> float:
    """Largest relative gap between a supplied derivative and central differences.

    The derivative of order ``order`` is compared with central differences of
    the order ``order - 1`` evaluator; errors are relative to the size of the
    difference quotient, floored at one.
    """
    if not 1 <= order <= f.order:
        raise OrderUnavailable(f"{f.name} provides derivatives up to order {f.order}")
    probes = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    worst = 0.0
    for y in probes:
        exact = f.derivative(order, y)
        fd = np.empty_like(exact)
        for l in range(f.domain_dim):
            e = np.zeros(f.domain_dim)
            e[l] = h
            up, dn = y + e, y - e
            fd[..., l] = (f.derivative(order - 1, up) - f.derivative(order - 1, dn)) / (up[l] - dn[l])
        err = float(np.linalg.norm((exact - fd).ravel())) / max(1.0, float(np.linalg.norm(fd.ravel())))
        worst = max(worst, err)
    return worst


# -- built-in catalogue -----------------------------------------------------


def _diag(vals: np.ndarray, k: int) -> np.ndarray:
    """Embed ``(..., n)`` values on the diagonal of a ``(..., n, ..., n)`` tensor with k+1 axes."""
    n = vals.shape[-1]
    out = np.zeros(vals.shape + (n,) * k)
    idx = (Ellipsis,) + (np.arange(n),) * (k + 1)
    out[idx] = vals
    return out


def componentwise(name: str, n: int, derivs: list[Callable], maxima: list[float]) -> SmoothFunction:
    """``F(y)_k = g(y_k)`` for a scalar ``g`` with derivatives ``derivs``."""
    funcs = [lambda y, g=derivs[0]: g(y)]
    for k, g in enumerate(derivs[1:], start=1):
        funcs.append(lambda y, g=g, k=k: _diag(g(y), k))
    root = math.sqrt(n)
    return SmoothFunction(name, n, (n,), funcs, [root * m for m in maxima])


_BUMP_X2 = math.sqrt(3.0 - math.sqrt(6.0))
_BUMP_MAX = [
    math.exp(-0.5),
    1.0,
    abs(_BUMP_X2**3 - 3 * _BUMP_X2) * math.exp(-0.5 * _BUMP_X2**2),
    3.0,
]
_TANH_MAX = [1.0, 1.0, 4.0 / (3.0 * math.sqrt(3.0)), 2.0]


def sin_field(n: int = 1) -> SmoothFunction:
    return componentwise(
        "sin", n, [np.sin, np.cos, lambda y: -np.sin(y), lambda y: -np.cos(y)], [1.0, 1.0, 1.0, 1.0]
    )


def _sech2(y):
    return 1.0 / np.cosh(y) ** 2


def tanh_field(n: int = 1) -> SmoothFunction:
    return componentwise(
        "tanh",
        n,
        [
            np.tanh,
            _sech2,
            lambda y: -2.0 * np.tanh(y) * _sech2(y),
            lambda y: _sech2(y) * (6.0 * np.tanh(y) ** 2 - 2.0),
        ],
        _TANH_MAX,
    )


def bump_field(n: int = 1) -> SmoothFunction:
    """``g(x) = x exp(-x^2/2)`` in every component; bounded with all derivatives."""
    e = lambda y: np.exp(-0.5 * y * y)  # noqa: E731
    return componentwise(
        "bump",
        n,
        [
            lambda y: y * e(y),
            lambda y: (1.0 - y * y) * e(y),
            lambda y: (y**3 - 3.0 * y) * e(y),
            lambda y: (-(y**4) + 6.0 * y * y - 3.0) * e(y),
        ],
        _BUMP_MAX,
    )


def linear_field(a) -> SmoothFunction:
    """``F(y) = A y``; ``A`` of shape ``(*codomain, n)``.  Unbounded on ``R^n``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim < 2:
        raise DimensionMismatch("linear field needs a matrix of shape (*codomain, n)")
    n = a.shape[-1]
    codomain = a.shape[:-1]
    zeros2 = np.zeros(codomain + (n, n))
    zeros3 = np.zeros(codomain + (n, n, n))
    return SmoothFunction(
        "linear",
        n,
        codomain,
        [
            lambda y: np.einsum("...l,...l->...", a, y[(...,) + (None,) * len(codomain) + (slice(None),)]),
            lambda y: np.broadcast_to(a, y.shape[:-1] + a.shape),
            lambda y: np.broadcast_to(zeros2, y.shape[:-1] + zeros2.shape),
            lambda y: np.broadcast_to(zeros3, y.shape[:-1] + zeros3.shape),
        ],
    )


def rotation_field(r) -> SmoothFunction:
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or not np.allclose(r, -r.T, atol=1e-14):
        raise ValueError("rotation field needs an antisymmetric square matrix")
    f = linear_field(r)
    f.name = "rotation"
    return f


def constant_field(kappa, n: int = 1) -> SmoothFunction:
    kappa = np.atleast_1d(np.asarray(kappa, dtype=np.float64))
    cod = kappa.shape
    return SmoothFunction(
        "const",
        n,
        cod,
        [
            lambda y: np.broadcast_to(kappa, y.shape[:-1] + cod),
            lambda y: np.zeros(y.shape[:-1] + cod + (n,)),
            lambda y: np.zeros(y.shape[:-1] + cod + (n, n)),
            lambda y: np.zeros(y.shape[:-1] + cod + (n, n, n)),
        ],
        [float(np.linalg.norm(kappa.ravel())), 0.0, 0.0, 0.0],
    )


def _ridge_field(name, seed, n, d, scale, profile, maxima) -> SmoothFunction:
    """``F(y)[k, i] = c[k,i] * g(a[k,i] . y + b[k,i])``, a map ``R^n -> L(R^d, R^n)``."""
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.normal(size=(n, d, n))
    b = rng.uniform(-math.pi, math.pi, size=(n, d))
    c = scale * rng.uniform(0.5, 1.0, size=(n, d))

    def arg(y):
        return np.einsum("kil,...l->...ki", a, y) + b

    def make(k):
        def ev(y):
            g = c * profile[k](arg(y))
            for _ in range(k):
                g = g[..., None]
            out = g
            for j in range(k):
                shape = (n, d) + (1,) * j + (n,) + (1,) * (k - j - 1)
                out = out * a.reshape(shape)
            return out

        return ev

    anorm = np.linalg.norm(a, axis=2)
    bounds = [float(np.sqrt(np.sum((c * maxima[k] * anorm**k) ** 2))) for k in range(4)]
    return SmoothFunction(name, n, (n, d), [make(k) for k in range(4)], bounds)


def sin_matrix_field(seed: int = 0, n: int = 2, d: int = 2, scale: float = 1.0) -> SmoothFunction:
    prof = [np.sin, np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u)]
    return _ridge_field("sin_matrix", seed, n, d, scale, prof, [1.0, 1.0, 1.0, 1.0])


def tanh_matrix_field(seed: int = 0, n: int = 2, d: int = 2, scale: float = 1.0) -> SmoothFunction:
    prof = [
        np.tanh,
        _sech2,
        lambda u: -2.0 * np.tanh(u) * _sech2(u),
        lambda u: _sech2(u) * (6.0 * np.tanh(u) ** 2 - 2.0),
    ]
    return _ridge_field("tanh_matrix", seed, n, d, scale, prof, _TANH_MAX)


def grad_sin_field(seed: int = 0, n: int = 1, d: int = 2, scale: float = 1.0) -> SmoothFunction:
    """Gradients of ``phi_k(x) = c_k sin(a_k . x + b_k)``: a map ``R^d -> L(R^d, R^n)``.

    Its derivative is a Hessian, hence symmetric in the two ``R^d`` slots.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.normal(size=(n, d))
    b = rng.uniform(-math.pi, math.pi, size=n)
    c = scale * rng.uniform(0.5, 1.0, size=n)
    # phase shifts turn derivatives of sin into sin(u + m pi/2)

    def make(k):
        def ev(x):
            u = np.einsum("kl,...l->...k", a, x) + b
            g = c * np.sin(u + (k + 1) * math.pi / 2)
            out = g[..., None] * a  # (..., n, d)
            for _ in range(k):
                out = out[..., None] * a.reshape((n,) + (1,) * (out.ndim - x.ndim) + (d,))
            return out

        return ev

    anorm = np.linalg.norm(a, axis=1)
    bounds = [float(np.sqrt(np.sum((c * anorm ** (k + 1)) ** 2))) for k in range(4)]
    return SmoothFunction("grad_sin", d, (n, d), [make(k) for k in range(4)], bounds)


def as_field(f: SmoothFunction, d: int) -> SmoothFunction:
    """View a vector field ``R^n -> R^n`` as ``R^n -> L(R^1, R^n)`` when ``d = 1``."""
    if len(f.codomain) == 2:
        if f.codomain != (f.domain_dim, d):
            raise DimensionMismatch(f"field codomain {f.codomain} does not match (n, d) = {(f.domain_dim, d)}")
        return f
    if d != 1 or f.codomain != (f.domain_dim,):
        raise DimensionMismatch(f"cannot use codomain {f.codomain} as a field driven by {d} dimensions")

    def wrap(k):
        return lambda y: np.expand_dims(f.derivative(k, y), y.ndim)

    g = SmoothFunction(f.name, f.domain_dim, (f.domain_dim, 1), [wrap(k) for k in range(f.order + 1)], f.bounds)
    return g


def _split_params(text: str) -> dict:
    params, depth, buf = {}, 0, ""
    parts = []
    for ch in text:
        if ch in "[{(":
            depth += 1
        elif ch in "]})":
            depth -= 1
        if ch in ",;" and depth == 0:
            parts.append(buf)
            buf = ""
        else:
            buf += ch
    if buf:
        parts.append(buf)
    for p in parts:
        key, _, val = p.partition("=")
        params[key.strip()] = json.loads(val)
    return params


BUILTINS = {
    "sin": lambda p: sin_field(p.get("n", 1)),
    "tanh": lambda p: tanh_field(p.get("n", 1)),
    "bump": lambda p: bump_field(p.get("n", 1)),
    "linear": lambda p: linear_field(p["A"]),
    "rotation": lambda p: rotation_field(p["R"]),
    "const": lambda p: constant_field(p["kappa"], p.get("n", 1)),
    "sin_matrix": lambda p: sin_matrix_field(p.get("seed", 0), p.get("n", 2), p.get("d", 2), p.get("scale", 1.0)),
    "tanh_matrix": lambda p: tanh_matrix_field(p.get("seed", 0), p.get("n", 2), p.get("d", 2), p.get("scale", 1.0)),
    "grad_sin": lambda p: grad_sin_field(p.get("seed", 0), p.get("n", 1), p.get("d", 2), p.get("scale", 1.0)),
}


def builtin(spec: str) -> SmoothFunction:
    """Build a catalogue field from ``"name"`` or ``"name:key=value,..."`` (values are JSON)."""
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name not in BUILTINS:
        raise UnknownField(f"unknown field {name!r}; available: {sorted(BUILTINS)}")
    return BUILTINS[name](_split_params(rest) if rest else {})
