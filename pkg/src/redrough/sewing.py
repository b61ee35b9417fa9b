"""The reduced rough integral as a compensated Riemann sum.

The integrand is a controlled path ``(Y, Y')`` with ``Y`` in ``L(V, W)``
(values of shape ``(*w, d)``) and ``Y'`` in ``L(V (x) V, W)`` (values of shape
``(*w, d, d)``).  The germ over ``[s, t]`` is

    A[s,t] = Y_s X[s,t] + Y'_s : S[s,t],

and the integral on the grid is the compensated prefix sum of the one-step
germs.  Because ``S`` is symmetric only the symmetric part of ``Y'`` enters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .controlled import ControlledPath, act, controlled_norms
from .errors import DimensionMismatch, IndexOutOfRange
from .grid import GridPath, holder_seminorm, pair_offsets, resolve_policy, sup_norm
from .rough_path import ReducedRoughPath, rrp_norm
from .tensor import compensated_cumsum, frob, symmetrize


@dataclass(frozen=True)
class Germ:
    s_index: int
    t_index: int
    value: np.ndarray


@dataclass(frozen=True)
class IntegralResult:
    values: GridPath
    refinement_depth: int
    germ_defect_3alpha: float


def sewing_constant(alpha: float) -> float:
    """``2 / (1 - 2^(1 - 3 alpha))``, the dyadic sewing constant."""
    return 2.0 / (1.0 - 2.0 ** (1.0 - 3.0 * alpha))


def _check_integrand(c: ControlledPath, r: ReducedRoughPath) -> None:
    c.require_base(r)
    d = r.dim
    if len(c.vshape) < 1 or c.vshape[-1] != d:
        raise DimensionMismatch(f"integrand values must be linear maps on R^{d}, got shape {c.vshape}")


def _pair(yp: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Contract the last two axes of ``yp`` (shape ``(m, *w, d, d)``) with ``s`` (shape ``(m, d, d)``)."""
    extra = yp.ndim - s.ndim
    s = s.reshape(s.shape[:1] + (1,) * extra + s.shape[1:])
    return np.einsum("...ij,...ij->...", yp, s)


def germ_diagonal(c: ControlledPath, r: ReducedRoughPath, k: int) -> np.ndarray:
    """``[A[t_i, t_{i+k}] for all i]``."""
    x = r.x
    first = act(c.y[:-k], x[k:] - x[:-k])
    return first + _pair(c.y_prime[:-k], r.second_level_diagonal(k))


def germ(c: ControlledPath, r: ReducedRoughPath, i: int, j: int) -> Germ:
    _check_integrand(c, r)
    r.grid.check_pair(i, j)
    if i == j:
        raise IndexOutOfRange("a germ needs i < j")
    val = act(c.y[i : i + 1], r.increment(i, j)[None])[0]
    val = val + _pair(c.y_prime[i : i + 1], r.second_level(i, j)[None])[0]
    return Germ(i, j, val)


def germ_defect(c: ControlledPath, r: ReducedRoughPath, budget: str = "auto") -> float:
    """Empirical ``sup |A[s,t] - A[s,u] - A[u,t]| / |t - s|^{3 alpha}`` over midpoint triples."""
    n = r.grid.n_steps
    if n < 2:
        return 0.0
    t = r.grid.times
    w = len(c.vshape) - 1
    best = 0.0
    for k in pair_offsets(resolve_policy(budget, n // 2), n // 2):
        whole = germ_diagonal(c, r, 2 * k)
        half = germ_diagonal(c, r, k)
        dA = whole - half[: whole.shape[0]] - half[k : k + whole.shape[0]]
        h = t[2 * k :] - t[: -2 * k]
        q = frob(dA, w) * np.exp(-3 * r.alpha * np.log(h))
        best = max(best, float(np.max(q)))
    return best


def integrate(c: ControlledPath, r: ReducedRoughPath, defect_budget: str | None = "dyadic") -> IntegralResult:
    """Grid-level compensated Riemann sum ``I_{t_k} = sum_{i<k} A[t_i, t_{i+1}]``.

    ``defect_budget=None`` skips the germ defect estimate.
    """
    _check_integrand(c, r)
    vals = compensated_cumsum(germ_diagonal(c, r, 1), axis=0)
    defect = float("nan") if defect_budget is None else germ_defect(c, r, defect_budget)
    return IntegralResult(GridPath(r.grid, vals), 0, defect)


def antisymmetry_report(c: ControlledPath) -> float:
    """Largest Frobenius norm of the antisymmetric part of ``Y'_t`` over the grid."""
    anti = 0.5 * (c.y_prime - np.swapaxes(c.y_prime, -1, -2))
    w = c.y_prime.ndim - 1
    return float(np.max(frob(anti, w)))


def symmetrized_integrand(c: ControlledPath) -> ControlledPath:
    return ControlledPath(c.base, c.y, symmetrize(c.y_prime))


@dataclass(frozen=True)
class CertificateTerms:
    x_alpha: float
    s_2alpha: float
    r_2alpha: float
    y_prime_alpha: float
    constant: float

    def rhs(self, h: float, alpha: float) -> float:
        return self.constant * (self.x_alpha * self.r_2alpha + self.s_2alpha * self.y_prime_alpha) * h ** (3 * alpha)


def certificate_terms(c: ControlledPath, r: ReducedRoughPath, budget: str = "auto") -> CertificateTerms:
    a = r.alpha
    rn = rrp_norm(r, budget)
    cn = controlled_norms(c, budget)
    return CertificateTerms(rn.x_alpha, rn.s_2alpha, cn.remainder_2alpha, cn.y_prime_alpha, sewing_constant(a))


def local_error_certificate(
    c: ControlledPath,
    r: ReducedRoughPath,
    i: int,
    j: int,
    oracle_depth: int = 0,
    refine: Callable[[int], tuple[ControlledPath, ReducedRoughPath]] | None = None,
    terms: CertificateTerms | None = None,
    integral: np.ndarray | None = None,
) -> tuple[float, float]:
    """``(|I[s,t] - A[s,t]|, C_a (|X| |R| + |S| |Y'|) |t-s|^{3a})`` for the pair ``(i, j)``.

    With ``oracle_depth > 0`` the integral is taken from ``refine(depth)``,
    which must return the integrand and driver resampled on a grid refined
    ``2**depth`` times; grid index ``i`` then maps to ``i * 2**depth``.
    """
    _check_integrand(c, r)
    r.grid.check_pair(i, j)
    if i == j:
        raise IndexOutOfRange("a certificate needs i < j")
    if oracle_depth > 0:
        if refine is None:
            raise ValueError("oracle_depth > 0 needs a resampling callback")
        cf, rf = refine(oracle_depth)
        m = 2**oracle_depth
        ivals = integrate(cf, rf, None).values.values
        inc = ivals[j * m] - ivals[i * m]
    else:
        ivals = integrate(c, r, None).values.values if integral is None else integral
        inc = ivals[j] - ivals[i]
    a = germ(c, r, i, j).value
    lhs = float(frob(inc - a, a.ndim))
    if terms is None:
        terms = certificate_terms(c, r)
    h = float(r.grid.times[j] - r.grid.times[i])
    return lhs, terms.rhs(h, r.alpha)


def integral_as_controlled(c: ControlledPath, r: ReducedRoughPath, result: IntegralResult | None = None) -> ControlledPath:
    """``(Z, Z') = (int Y dX, Y)``."""
    _check_integrand(c, r)
    if result is None:
        result = integrate(c, r, None)
    return ControlledPath(r, result.values.values, c.y)


# Relative allowance for rounding in the measured seminorms.  The bound can
# hold with equality (e.g. Y = (X, Id) for a linear X), where the measured
# side may exceed the exact value by a few ulps.
ROUNDING_SLACK = 64 * np.finfo(np.float64).eps


def integral_norm_bound(c: ControlledPath, r: ReducedRoughPath, budget: str = "auto") -> float:
    """``|Y|_a + |Y'|_inf |S|_2a + C_a T^a (|X|_a |R|_2a + |S|_2a |Y'|_a)``."""
    _check_integrand(c, r)
    a = r.alpha
    y_a = holder_seminorm(c.y_path(), a, budget).seminorm
    terms = certificate_terms(c, r, budget)
    yp_inf = sup_norm(c.y_prime_path())
    t = r.grid.horizon
    val = y_a + yp_inf * terms.s_2alpha + terms.constant * t**a * (
        terms.x_alpha * terms.r_2alpha + terms.s_2alpha * terms.y_prime_alpha
    )
    return val * (1.0 + ROUNDING_SLACK)


def dyadic_pairs(n_steps: int, scales: int | None = None) -> list[tuple[int, int]]:
    """Pairs ``(i, i + 2^k)`` at every dyadic length, a handful of anchors per length."""
    out = []
    k = 1
    while k <= n_steps:
        starts = sorted({0, (n_steps - k) // 2, n_steps - k})
        out.extend((s, s + k) for s in starts)
        k *= 2
    return out


def fit_slope(lengths, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(length)``."""
    x = np.log(np.asarray(lengths, dtype=np.float64))
    y = np.log(np.asarray(errors, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])
