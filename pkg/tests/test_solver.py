import json
import math

import numpy as np
import pytest

from redrough.controlled import ControlledPath
from redrough.drivers import gen_fbm, gen_smooth
from redrough.errors import DimensionMismatch, InvalidExponent
from redrough.functions import as_field, constant_field, linear_field, sin_field, sin_matrix_field
from redrough.grid import Grid, GridPath
from redrough.rough_path import geometric_lift, ito_lift
from redrough.solver import (
    SolverConfig,
    canonical_center,
    default_alpha,
    picard_map,
    solve_global,
    solve_local,
    verify_solution,
)


def line_rp(n=1024):
    g = Grid.uniform(n)
    return geometric_lift(GridPath(g, g.times[:, None]), 0.5)


def test_zero_field():
    r = geometric_lift(gen_fbm(0.45, 0, Grid.uniform(256), dim=2).path, 0.45)
    f = constant_field(np.zeros((3, 2)), 3)
    rep = solve_global([1.0, -2.0, 0.5], f, r)
    assert np.all(rep.solution.y == np.array([1.0, -2.0, 0.5]))


def test_constant_field_circle_exact():
    g = Grid.uniform(256, 2 * math.pi)
    r = geometric_lift(gen_smooth("circle", g), 0.5)
    rep = solve_global([0.2], constant_field([[0.7, -0.3]], 1), r)
    exact = 0.2 + 0.7 * (np.cos(g.times) - 1) - 0.3 * np.sin(g.times)
    assert np.max(np.abs(rep.solution.y[:, 0] - exact)) <= 1e-12


def test_exponential_and_sin_oracles():
    r = line_rp(1024)
    t = r.grid.times
    rep = solve_global([1.0], linear_field([[[1.0]]]), r)
    assert rep.solution.y[0, 0] == 1.0
    assert np.max(np.abs(rep.solution.y[:, 0] - np.exp(t))) <= 1e-5
    rep = solve_global([1.0], as_field(sin_field(1), 1), r)
    exact = 2 * np.arctan(math.tan(0.5) * np.exp(t))
    assert np.max(np.abs(rep.solution.y[:, 0] - exact)) <= 1e-5
    assert all(s.final_ratio <= 0.5 for s in rep.steps)


def test_picard_first_iterate():
    r = line_rp(64)
    t = r.grid.times
    f = linear_field([[[1.0]]])
    p = canonical_center([1.0], f, r)
    assert np.allclose(p.y[:, 0], 1 + t)
    q = picard_map(p, f, [1.0])
    assert np.allclose(q.y[:, 0], 1 + t + 0.5 * t**2, atol=1e-14)


def test_verify_solution_and_corruption():
    r = geometric_lift(gen_fbm(0.45, 1, Grid.uniform(512), dim=2).path, 0.45)
    f = sin_matrix_field(0, n=2, d=2, scale=0.5)
    rep = solve_global([0.1, 0.2], f, r, SolverConfig(ball_radius=None))
    v = verify_solution(rep, f, r)
    assert v["residual"] <= 1e-10 and v["remainder_finite"]
    y = rep.solution.y.copy()
    y[256] += 1e-3
    bad = ControlledPath(r, y, f(y))
    assert verify_solution(bad, f, r, xi=[0.1, 0.2])["residual"] >= 1e-4


def test_uniqueness_from_other_start():
    r = line_rp(256)
    f = as_field(sin_field(1), 1)
    cfg = SolverConfig().resolve(r)
    sol, _ = solve_local([1.0], f, r, (0, 256), cfg)
    center = canonical_center([1.0], f, r, (0, 256))
    t = r.grid.times
    start = ControlledPath(center.base, center.y + 0.05 * t[:, None] ** 2, center.y_prime)
    other, _ = solve_local([1.0], f, r, (0, 256), cfg, initial=start, gate=False)
    assert np.max(np.abs(other.y - sol.y)) <= 1e-12


def test_report_json_and_windows():
    r = ito_lift(gen_fbm(0.5, 2, Grid.uniform(1024)).path, 0.5)
    f = as_field(sin_field(1), 1)
    rep = solve_global([0.3], f, r, SolverConfig(ball_radius=None, tau_init=0.25))
    doc = json.loads(json.dumps(rep.to_json()))
    assert doc["schema"] == "redrough.solve_report/1"
    assert doc["global"] is True
    assert doc["steps"][0]["indices"][0] == 0 and doc["steps"][-1]["indices"][1] == 1024
    ends = [s["indices"] for s in doc["steps"]]
    assert all(a[1] == b[0] for a, b in zip(ends, ends[1:]))
    assert rep.theory_tau < 1.0


def test_config_validation():
    r = line_rp(16)
    with pytest.raises(InvalidExponent):
        SolverConfig(beta=0.3).resolve(r)
    with pytest.raises(InvalidExponent):
        SolverConfig(alpha=0.5).resolve(r)
    with pytest.raises(ValueError):
        SolverConfig(contraction_target=1.5).resolve(r)
    assert default_alpha(0.5) == pytest.approx(0.45)
    assert 1 / 3 < default_alpha(0.35) < 0.35
    with pytest.raises(DimensionMismatch):
        solve_global([1.0, 2.0], as_field(sin_field(1), 1), r)


def test_unbounded_field_is_local():
    rep = solve_global([1.0], linear_field([[[1.0]]]), line_rp(64))
    assert rep.global_solution is False
