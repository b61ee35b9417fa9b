"""Small dense tensor algebra on coordinate spaces.

Vectors are arrays of shape ``(d,)``, order-2 tensors ``(d, d)``, linear maps
``(n, m)`` and bilinear maps ``(n, m, m)``.  Every function also accepts
leading batch axes, which is how the higher modules evaluate whole grids at
once.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch

SYM_TOL = 1e-12


def _finite(a: np.ndarray, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} has non-finite entries")
    return a


def symmetrize(t) -> np.ndarray:
    """Return ``(t + t^T) / 2`` over the last two axes."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 2 or t.shape[-1] != t.shape[-2]:
        raise DimensionMismatch(f"expected square trailing axes, got shape {t.shape}")
    return 0.5 * (t + np.swapaxes(t, -1, -2))


def as_sym(t, tol: float = SYM_TOL) -> np.ndarray:
    """Validate that ``t`` is symmetric to ``tol`` and return an exactly symmetric copy."""
    t = _finite(t, "tensor")
    if t.ndim < 2 or t.shape[-1] != t.shape[-2]:
        raise DimensionMismatch(f"expected square trailing axes, got shape {t.shape}")
    defect = np.max(np.abs(t - np.swapaxes(t, -1, -2)), initial=0.0)
    if defect > tol:
        raise ValueError(f"tensor is not symmetric (max |T - T^T| = {defect:.3e})")
    return symmetrize(t)


def outer(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape[-1:] != v.shape[-1:]:
        raise DimensionMismatch(f"outer: lengths differ ({u.shape[-1:]} vs {v.shape[-1:]})")
    return u[..., :, None] * v[..., None, :]


def sym_outer(u, v) -> np.ndarray:
    return symmetrize(outer(u, v))


def pair_bilinear(b, s) -> np.ndarray:
    """Contract a bilinear map ``b[..., k, i, j]`` with ``s[..., i, j]``.

    Only the part of ``b`` symmetric in ``(i, j)`` survives when ``s`` is
    symmetric.
    """
    b = np.asarray(b, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if b.ndim < 3 or s.ndim < 2 or b.shape[-2:] != s.shape[-2:]:
        raise DimensionMismatch(f"pair_bilinear: shapes {b.shape} and {s.shape} do not match")
    return np.einsum("...kij,...ij->...k", b, s)


def apply_linmap(a, v) -> np.ndarray:
    """Matrix-vector action, contracting the last axis of ``a`` with ``v``."""
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.ndim < 2 or v.ndim < 1 or a.shape[-1] != v.shape[-1]:
        raise DimensionMismatch(f"apply_linmap: shapes {a.shape} and {v.shape} do not match")
    return np.einsum("...ij,...j->...i", a, v)


def frob(a, axes: int) -> np.ndarray:
    """Frobenius norm over the trailing ``axes`` axes (Euclidean for vectors)."""
    a = np.asarray(a, dtype=np.float64)
    if axes == 0:
        return np.abs(a)
    flat = a.reshape(a.shape[: a.ndim - axes] + (-1,))
    return np.sqrt(np.einsum("...i,...i->...", flat, flat))


def antisymmetry_defect(b) -> float:
    """Frobenius norm of the part of ``b`` antisymmetric in its last two axes."""
    b = np.asarray(b, dtype=np.float64)
    anti = 0.5 * (b - np.swapaxes(b, -1, -2))
    return float(np.sqrt(np.sum(anti * anti)))


def compensated_cumsum(a, axis: int = 0) -> np.ndarray:
    """Prefix sums with error compensation, prepended with a zero slice.

    ``np.add.accumulate`` adds left to right, so the rounding error of every
    partial sum can be recovered exactly with the two-sum identity and added
    back in a second (much smaller) accumulation pass.
    """
    a = np.moveaxis(np.asarray(a, dtype=np.float64), axis, 0)
    out = np.zeros((a.shape[0] + 1,) + a.shape[1:])
    if a.shape[0] == 0:
        return np.moveaxis(out, 0, axis)
    s = np.add.accumulate(a, axis=0)
    prev = np.concatenate([np.zeros((1,) + a.shape[1:]), s[:-1]], axis=0)
    bb = s - prev
    err = (prev - (s - bb)) + (a - bb)
    out[1:] = s + np.add.accumulate(err, axis=0)
    return np.moveaxis(out, 0, axis)


def compensated_sum(a, axis: int = 0) -> np.ndarray:
    """Accurate total along ``axis``.

    The summed axis is made the contiguous last axis so numpy applies
    pairwise summation, whose error grows like ``eps log n``.
    """
    a = np.moveaxis(np.asarray(a, dtype=np.float64), axis, -1)
    return np.sum(np.ascontiguousarray(a), axis=-1)
