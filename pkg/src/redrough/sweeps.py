"""Convergence sweeps over dyadic grid refinements."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .controlled import ControlledPath, identity_path
from .drivers import gen_fbm, gen_smooth
from .functions import constant_field, linear_field
from .grid import Grid, GridPath
from .rough_path import geometric_lift
from .sewing import integrate
from .solver import solve_global

SCENARIOS = ("circle-constant", "linear-line", "fbm-identity", "fbm-gradient")


@dataclass
class SweepTable:
    scenario: str
    n: list[int]
    value: list[float]
    error: list[float]
    fitted_order: float

    def rows(self):
        for k in range(len(self.n)):
            yield self.n[k], self.value[k], self.error[k]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "value", "error", "fitted_order"])
            for n, v, e in self.rows():
                w.writerow([n, repr(v), repr(e), repr(self.fitted_order)])

    def to_json(self) -> dict:
        return {"schema": "redrough.convergence/1", "scenario": self.scenario, "N": self.n,
                "value": self.value, "error": self.error, "fitted_order": self.fitted_order}


def fitted_order(ns, errors) -> float:
    """``p`` in ``error ~ K N^(-p)`` by least squares on the positive errors; NaN if fewer than two."""
    ns = np.asarray(ns, dtype=np.float64)
    e = np.asarray(errors, dtype=np.float64)
    keep = e > 0
    if keep.sum() < 2:
        return float("nan")
    return float(-np.polyfit(np.log(ns[keep]), np.log(e[keep]), 1)[0])


def _cell_circle(n: int):
    g = Grid.uniform(n, 2 * math.pi)
    r = geometric_lift(gen_smooth("circle", g), 0.5)
    a, b = 0.7, -0.3
    f = constant_field([[a, b]], 1)
    rep = solve_global([0.2], f, r)
    exact = 0.2 + a * (np.cos(g.times) - 1) + b * np.sin(g.times)
    return float(rep.solution.y[-1, 0]), float(np.max(np.abs(rep.solution.y[:, 0] - exact)))


def _cell_linear(n: int):
    g = Grid.uniform(n)
    r = geometric_lift(gen_smooth("line", g), 0.5)
    rep = solve_global([1.0], linear_field([[[1.0]]]), r)
    return float(rep.solution.y[-1, 0]), float(np.max(np.abs(rep.solution.y[:, 0] - np.exp(g.times))))


def _fbm_levels(hurst, seed, finest_log2, levels):
    fine = gen_fbm(hurst, seed, Grid.uniform(2**finest_log2)).path
    out = {}
    for k in levels:
        stride = 2 ** (finest_log2 - k)
        g = Grid(fine.grid.times[::stride])
        out[2**k] = GridPath(g, fine.values[::stride])
    return fine, out


def _fbm_identity_value(x: GridPath, alpha: float) -> float:
    r = geometric_lift(x, alpha)
    return float(integrate(identity_path(r), r, None).values.values[-1])


def _fbm_gradient_value(x: GridPath, alpha: float) -> float:
    r = geometric_lift(x, alpha)
    xv = r.x[:, 0]
    c = ControlledPath(r, np.cos(xv)[:, None], -np.sin(xv)[:, None, None])
    return float(integrate(c, r, None).values.values[-1])


def convergence_sweep(
    scenario: str, levels=range(4, 11), hurst: float = 0.45, seed: int = 0, threads: int = 1
) -> SweepTable:
    """Run one scenario over ``N = 2^k``.

    ``circle-constant`` and ``linear-line`` compare solver output with the
    closed form.  ``fbm-identity`` integrates ``(X, Id)`` and reports the
    difference to the next finer level (pure roundoff for the geometric
    lift).  ``fbm-gradient`` integrates ``(cos X, -sin X)`` against the exact
    value ``sin X_T - sin X_0``.  Coarser fBm levels are subsamples of one
    finest sample.
    """
    levels = list(levels)
    ns = [2**k for k in levels]
    if scenario in ("circle-constant", "linear-line"):
        cell = _cell_circle if scenario == "circle-constant" else _cell_linear
        with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
            res = list(ex.map(cell, ns))
        values = [v for v, _ in res]
        errors = [e for _, e in res]
    elif scenario in ("fbm-identity", "fbm-gradient"):
        finest = max(levels) + (1 if scenario == "fbm-identity" else 0)
        fine, paths = _fbm_levels(hurst, seed, finest, levels + [finest])
        fn = _fbm_identity_value if scenario == "fbm-identity" else _fbm_gradient_value
        with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
            vals = dict(zip(sorted(paths), ex.map(lambda n: fn(paths[n], hurst), sorted(paths))))
        values = [vals[n] for n in ns]
        if scenario == "fbm-identity":
            errors = [abs(vals[n] - vals[2 * n]) for n in ns]
        else:
            xv = fine.values[:, 0]
            exact = math.sin(xv[-1]) - math.sin(xv[0])
            errors = [abs(vals[n] - exact) for n in ns]
    else:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    return SweepTable(scenario, ns, values, errors, fitted_order(ns, errors))
