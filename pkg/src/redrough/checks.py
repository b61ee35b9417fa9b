"""Desk-scale invariant suites behind the ``check`` subcommand."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .controlled import compose, compose_norm_bound, controlled_norms, identity_path, lift_function
from .drivers import gen_fbm, gen_smooth, rng_for
from .functions import builtin, constant_field, fd_check, linear_field, sin_matrix_field, tanh_field
from .grid import Grid, GridPath, holder_seminorm, sup_bound_from_holder
from .rough_path import (
    ReducedRoughPath,
    geometric_lift,
    ito_lift,
    rrp_norm,
    validate_dense_second_level,
)
from .sewing import integral_as_controlled, integral_norm_bound, integrate, symmetrized_integrand
from .solver import solve_global, verify_solution
from .tensor import pair_bilinear, sym_outer, symmetrize

SCHEMA = "redrough.check/1"


def _suite_tensor(seed: int) -> dict:
    rng = rng_for(seed)
    u, v = rng.normal(size=(2, 64, 3))
    s = sym_outer(u, v)
    sym_err = float(np.max(np.abs(s - np.swapaxes(s, -1, -2))))
    b = rng.normal(size=(64, 2, 3, 3))
    full = pair_bilinear(b, s)
    part = pair_bilinear(symmetrize(b), s)
    anti_err = float(np.max(np.abs(full - part)))
    return {"passed": sym_err == 0.0 and anti_err <= 1e-14, "symmetry_error": sym_err, "antisymmetric_leak": anti_err}


def _suite_grid(seed: int) -> dict:
    g = Grid.uniform(256, 2.0)
    x = gen_smooth("line", g, v=[3.0, 4.0])
    semi = holder_seminorm(x, 0.5).seminorm
    expected = 5.0 * 2.0**0.5
    fb = gen_fbm(0.45, seed, g).path
    bound = sup_bound_from_holder(fb, 0.45)
    sup = float(np.max(np.abs(fb.values)))
    return {"passed": abs(semi - expected) <= 1e-12 * expected and bound >= sup,
            "line_seminorm": semi, "line_expected": expected, "sup_bound": bound, "sup": sup}


def _suite_rough_path(seed: int) -> dict:
    g = Grid.uniform(512)
    x = gen_fbm(0.4, seed, g, dim=2).path
    worst = 0.0
    rng = rng_for(seed + 3)
    for r in (geometric_lift(x, 0.4), ito_lift(x, 0.4)):
        for i, j, k in np.sort(rng.choice(513, size=(100, 3)), axis=1):
            if i < j < k:
                worst = max(worst, r.chen_defect(int(i), int(j), int(k)))
    r = geometric_lift(x, 0.4)
    back = ReducedRoughPath.from_json(r.to_json())
    n1, n2 = rrp_norm(r), rrp_norm(back)
    return {"passed": worst <= 1e-10 and abs(n1.total - n2.total) <= 1e-12,
            "max_chen_defect": worst, "roundtrip_norm_diff": abs(n1.total - n2.total)}


def _suite_functions(seed: int) -> dict:
    rng = rng_for(seed)
    probes = rng.normal(size=(16, 2))
    errs = {}
    for name in ("sin", "tanh", "bump"):
        f = builtin(f"{name}:n=2")
        errs[name] = max(fd_check(f, k, probes) for k in (1, 2, 3))
    f = sin_matrix_field(seed, n=2, d=2)
    errs["sin_matrix"] = max(fd_check(f, k, probes) for k in (1, 2, 3))
    worst = max(errs.values())
    return {"passed": worst <= 1e-6, "fd_errors": errs}


def _suite_controlled(seed: int) -> dict:
    g = Grid.uniform(128)
    x = gen_smooth("circle", g)
    r = geometric_lift(x, 0.45)
    c = lift_function(tanh_field(2), r)
    f = sin_matrix_field(seed, n=2, d=2, scale=0.5)
    measured = controlled_norms(compose(f, c)).seminorm
    bound = compose_norm_bound(f, c)
    ident = controlled_norms(identity_path(r))
    return {"passed": measured <= bound and ident.remainder_2alpha == 0.0,
            "compose_measured": measured, "compose_bound": bound, "identity_remainder": ident.remainder_2alpha}


def _suite_sewing(seed: int) -> dict:
    errs = []
    for n in (2, 16, 1024):
        g = Grid.uniform(n)
        x = GridPath(g, g.times[:, None])
        for lift, exact in ((geometric_lift, 0.5), (ito_lift, 0.0)):
            r = lift(x, 0.5)
            errs.append(abs(float(integrate(identity_path(r), r, None).values.values[-1]) - exact))
    g = Grid.uniform(256)
    x = gen_fbm(0.45, seed, g, dim=2).path
    r = geometric_lift(x, 0.45)
    c = lift_function(sin_matrix_field(seed, n=2, d=2), r)
    full = integrate(c, r, None).values.values
    sym = integrate(symmetrized_integrand(c), r, None).values.values
    leak = float(np.max(np.abs(full - sym)))
    measured = controlled_norms(integral_as_controlled(c, r)).seminorm
    bound = integral_norm_bound(c, r)
    return {"passed": max(errs) <= 1e-14 and leak <= 1e-14 and measured <= bound,
            "oracle_error": max(errs), "antisymmetric_leak": leak, "bound_measured": measured, "bound": bound}


def _suite_solver(seed: int) -> dict:
    g = Grid.uniform(512, 2 * math.pi)
    r = geometric_lift(gen_smooth("circle", g), 0.5)
    rep = solve_global([0.0], constant_field([[0.7, -0.3]], 1), r)
    exact = 0.7 * (np.cos(g.times) - 1) - 0.3 * np.sin(g.times)
    const_err = float(np.max(np.abs(rep.solution.y[:, 0] - exact)))
    g2 = Grid.uniform(1024)
    r2 = geometric_lift(GridPath(g2, g2.times[:, None]), 0.5)
    rep2 = solve_global([1.0], linear_field([[[1.0]]]), r2)
    exp_err = float(np.max(np.abs(rep2.solution.y[:, 0] - np.exp(g2.times))))
    ratios = max(s.final_ratio for s in rep.steps + rep2.steps)
    ver = verify_solution(rep2, linear_field([[[1.0]]]), r2)
    return {"passed": const_err <= 1e-12 and exp_err <= 1e-5 and ratios <= 0.5 and ver["residual"] <= 1e-10,
            "constant_field_error": const_err, "exp_error": exp_err, "max_final_ratio": ratios,
            "residual": ver["residual"]}


def _suite_drivers(seed: int) -> dict:
    g = Grid.uniform(256)
    x = gen_fbm(0.4, seed, g).path
    liss = gen_smooth("lissajous", g)
    return {"passed": bool(x.values[0, 0] == 0.0 and np.all(liss.values[0] == 0.0)),
            "fbm_origin": float(x.values[0, 0]), "lissajous_origin": liss.values[0].tolist()}


SUITES = {
    "controlled_path": _suite_controlled,
    "drivers_io_cli": _suite_drivers,
    "path_grid": _suite_grid,
    "rde_solver": _suite_solver,
    "reduced_rough_path": _suite_rough_path,
    "sewing_integral": _suite_sewing,
    "smooth_function": _suite_functions,
    "tensor_core": _suite_tensor,
}


def run_checks(seed: int = 0, threads: int = 1) -> dict:
    names = sorted(SUITES)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        results = list(ex.map(lambda n: SUITES[n](seed), names))
    suites = {}
    for n, res in zip(names, results):
        res = dict(res)
        res["passed"] = bool(res["passed"])
        suites[n] = res
    return {"schema": SCHEMA, "seed": seed, "suites": suites, "passed": all(s["passed"] for s in suites.values())}


def check_dense_table(doc: dict, tol: float = 1e-10) -> dict:
    """Validate a dense second-level table ``{"grid", "path", "table"}``."""
    grid = Grid(np.asarray(doc["grid"], dtype=np.float64))
    x = GridPath(grid, np.asarray(doc["path"], dtype=np.float64))
    worst, triple, ok = validate_dense_second_level(x, doc["table"], tol)
    return {"schema": "redrough.dense_check/1", "max_scaled_defect": worst,
            "worst_triple": None if triple is None else list(triple), "tolerance": tol, "passed": bool(ok)}
