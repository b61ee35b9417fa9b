"""Synthetic drivers: closed-form curves, piecewise-linear interpolants and fBm."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky

from .errors import DimensionMismatch, EmbeddingFailure, InvalidHurst, UnknownCurve
from .grid import Grid, GridPath
from .rough_path import ReducedRoughPath, geometric_lift, ito_lift

CHOLESKY_LIMIT = 2**11


def rng_for(seed: int) -> np.random.Generator:
    """The package-wide counter-based generator."""
    return np.random.Generator(np.random.Philox(int(seed)))


def _line(t, v=(1.0,)):
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    return t[:, None] * v


def _circle(t, radius=1.0, freq=1.0):
    return radius * np.stack([np.cos(freq * t), np.sin(freq * t)], axis=1)


def _polynomial(t, coeffs=((0.0, 1.0),)):
    """One row of coefficients ``c_0 + c_1 t + ...`` per component."""
    rows = [np.polynomial.polynomial.polyval(t, np.asarray(c, dtype=np.float64)) for c in coeffs]
    return np.stack(rows, axis=1)


def _lissajous(t, a=3.0, b=2.0, delta=0.0):
    return np.stack([np.sin(a * t + delta), np.sin(b * t)], axis=1)


CURVES = {"line": _line, "circle": _circle, "polynomial": _polynomial, "lissajous": _lissajous}


def gen_smooth(curve: str, grid: Grid, **params) -> GridPath:
    try:
        fn = CURVES[curve]
    except KeyError:
        raise UnknownCurve(f"unknown curve {curve!r}; choose from {sorted(CURVES)}") from None
    return GridPath(grid, fn(grid.times, **params))


def gen_piecewise_linear(nodes_t, nodes_x, grid: Grid) -> GridPath:
    """Linear interpolation of ``nodes_x`` (shape ``(k, d)``) at the grid times."""
    nt = np.asarray(nodes_t, dtype=np.float64)
    nx = np.asarray(nodes_x, dtype=np.float64)
    if nx.ndim == 1:
        nx = nx[:, None]
    if nx.shape[0] != nt.size or nt.size < 2:
        raise DimensionMismatch("need at least two nodes with one value row each")
    if np.any(np.diff(nt) <= 0):
        raise ValueError("node times must be strictly increasing")
    vals = np.stack([np.interp(grid.times, nt, nx[:, k]) for k in range(nx.shape[1])], axis=1)
    return GridPath(grid, vals)


def check_hurst(h: float) -> float:
    h = float(h)
    if not (1.0 / 3.0 < h <= 0.5):
        raise InvalidHurst(f"Hurst index {h} is outside the regime (1/3, 1/2]")
    return h


def _fgn_autocov(h: float, n: int) -> np.ndarray:
    k = np.arange(n, dtype=np.float64)
    return 0.5 * (np.abs(k + 1) ** (2 * h) - 2 * np.abs(k) ** (2 * h) + np.abs(k - 1) ** (2 * h))


def _circulant_eigs(h: float, n: int) -> np.ndarray:
    g = _fgn_autocov(h, n + 1)
    row = np.concatenate([g, g[-2:0:-1]])  # length 2n
    lam = np.fft.fft(row).real
    if np.min(lam) < -1e-10 * np.max(lam):
        raise EmbeddingFailure(f"circulant embedding has a negative eigenvalue ({np.min(lam):.3e})")
    return np.maximum(lam, 0.0)


def _fgn_circulant(h: float, n: int, rng: np.random.Generator, dim: int) -> np.ndarray:
    """Unit-step fractional Gaussian noise of length ``n`` by Davies-Harte."""
    lam = _circulant_eigs(h, n)
    m = lam.size
    z = rng.standard_normal((dim, m)) + 1j * rng.standard_normal((dim, m))
    w = np.fft.fft(np.sqrt(lam / m) * z, axis=1)
    return w.real[:, :n].T


def _fgn_cholesky(h: float, n: int, rng: np.random.Generator, dim: int) -> np.ndarray:
    g = _fgn_autocov(h, n)
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    lower = cholesky(g[idx], lower=True)
    return lower @ rng.standard_normal((n, dim))


@dataclass
class FbmSample:
    path: GridPath
    method: str


def gen_fbm(hurst: float, seed: int, grid: Grid, dim: int = 1, method: str = "auto") -> FbmSample:
    """Exact-covariance fBm sample on a uniform grid.

    ``method`` is ``circulant``, ``cholesky`` or ``auto`` (circulant, with a
    Cholesky fallback when the embedding fails and ``N <= 2^11``).
    """
    h = check_hurst(hurst)
    n = grid.n_steps
    dt = np.diff(grid.times)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("fBm sampling needs a uniform grid")
    rng = rng_for(seed)
    used = method
    if method in ("auto", "circulant"):
        try:
            noise = _fgn_circulant(h, n, rng, dim)
            used = "circulant"
        except EmbeddingFailure:
            if method == "circulant" or n > CHOLESKY_LIMIT:
                raise
            noise = _fgn_cholesky(h, n, rng_for(seed), dim)
            used = "cholesky"
    elif method == "cholesky":
        noise = _fgn_cholesky(h, n, rng, dim)
    else:
        raise ValueError(f"unknown fBm method {method!r}")
    step = grid.horizon / n
    vals = np.concatenate([np.zeros((1, dim)), np.cumsum(noise, axis=0)], axis=0) * step**h
    return FbmSample(GridPath(grid, vals), used)


def fbm_covariance(hurst: float, s, t) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    h2 = 2 * hurst
    return 0.5 * (np.abs(s) ** h2 + np.abs(t) ** h2 - np.abs(t - s) ** h2)


def fbm_variance_table(hurst: float, n_steps: int, seeds, times=(0.25, 0.5, 1.0)) -> dict:
    """Empirical ``Var(X_t)`` over ``seeds`` on ``[0, 1]`` against ``t^(2H)``."""
    grid = Grid.uniform(n_steps)
    idx = [int(round(t * n_steps)) for t in times]
    samples = np.array([gen_fbm(hurst, s, grid).path.values[idx, 0] for s in seeds])
    var = samples.var(axis=0)
    exact = np.asarray(times) ** (2 * hurst)
    return {"times": list(times), "empirical": var.tolist(), "exact": exact.tolist(),
            "rel_err": (np.abs(var - exact) / exact).tolist()}


@dataclass
class DriverSpec:
    """Description of a driver: ``kind`` is ``smooth``, ``piecewise-linear`` or ``fbm``."""

    kind: str
    n_steps: int = 1024
    horizon: float = 1.0
    curve: str = "line"
    params: dict = field(default_factory=dict)
    nodes_t: list | None = None
    nodes_x: list | None = None
    hurst: float = 0.5
    seed: int = 0
    dim: int = 1
    method: str = "auto"
    lift: str = "geometric"
    alpha: float | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> DriverSpec:
        return cls(**doc)

    def grid(self) -> Grid:
        return Grid.uniform(self.n_steps, self.horizon)

    def path(self) -> GridPath:
        g = self.grid()
        if self.kind == "smooth":
            return gen_smooth(self.curve, g, **self.params)
        if self.kind == "piecewise-linear":
            return gen_piecewise_linear(self.nodes_t, self.nodes_x, g)
        if self.kind == "fbm":
            return gen_fbm(self.hurst, self.seed, g, self.dim, self.method).path
        raise ValueError(f"unknown driver kind {self.kind!r}")

    def default_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        if self.kind == "fbm":
            return check_hurst(self.hurst)
        return 0.5

    def rough_path(self) -> ReducedRoughPath:
        x = self.path()
        a = self.default_alpha()
        if self.lift == "geometric":
            return geometric_lift(x, a)
        if self.lift == "ito":
            return ito_lift(x, a)
        raise ValueError(f"unknown lift {self.lift!r}; use 'geometric' or 'ito'")
