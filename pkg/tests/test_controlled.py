import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from redrough.controlled import (
    ControlledPath,
    compose,
    compose_norm_bound,
    controlled_norms,
    identity_path,
    leibniz_norm_bound,
    leibniz_product,
    lift_function,
    load_json,
    save_json,
)
from redrough.drivers import gen_fbm, gen_smooth
from redrough.errors import BaseMismatch, BoundPreconditionViolated, DimensionMismatch
from redrough.functions import SmoothFunction, sin_field, sin_matrix_field, tanh_field
from redrough.grid import Grid, GridPath
from redrough.rough_path import geometric_lift, ito_lift


def square_fn():
    return SmoothFunction("sq", 1, (1,), [
        lambda y: y**2,
        lambda y: 2 * y[..., None],
        lambda y: np.full(y.shape + (1,), 2.0),
        lambda y: np.zeros(y.shape + (1, 1)),
    ])


def line_rp(n=64):
    g = Grid.uniform(n)
    return geometric_lift(GridPath(g, g.times[:, None]), 0.5)


def test_remainder_examples():
    r = line_rp()
    t = r.grid.times
    ident = identity_path(r)
    assert np.all(ident.remainder_diagonal(5) == 0)
    sq = ControlledPath(r, t**2, 2 * t)
    for i, j in [(0, 64), (10, 30)]:
        assert sq.remainder(i, j)[0] == pytest.approx((t[j] - t[i]) ** 2, abs=1e-15)
    n = controlled_norms(sq)
    assert n.y_prime_alpha == pytest.approx(2.0) and n.remainder_2alpha == pytest.approx(1.0)
    const = ControlledPath(r, np.ones(65), np.zeros(65))
    assert controlled_norms(const).seminorm == 0.0


def test_shape_validation():
    r = line_rp(8)
    with pytest.raises(DimensionMismatch):
        ControlledPath(r, np.zeros(9), np.zeros((9, 1, 2)))
    with pytest.raises(DimensionMismatch):
        ControlledPath(r, np.zeros(5), np.zeros(5))
    with pytest.raises(ValueError):
        ControlledPath(r, np.full(9, np.nan), np.zeros(9))


def test_compose_example():
    r = line_rp()
    t = r.grid.times
    c = compose(square_fn(), ControlledPath(r, t, np.ones(65)))
    assert np.allclose(c.y[:, 0], t**2) and np.allclose(c.y_prime[:, 0, 0], 2 * t)
    with pytest.raises(DimensionMismatch):
        compose(sin_field(2), c)


def test_chain_rule():
    r = geometric_lift(gen_fbm(0.45, 3, Grid.uniform(128), dim=2).path, 0.45)
    c = lift_function(tanh_field(2), r)
    f, g = sin_field(2), tanh_field(2)
    fg = SmoothFunction("fg", 2, (2,), [
        lambda y: f(g(y)),
        lambda y: np.einsum("...ij,...jk->...ik", f.derivative(1, g(y)), g.derivative(1, y)),
    ])
    base = identity_path(r)
    a = compose(f, compose(g, base))
    b = compose(fg, base)
    assert np.allclose(a.y, b.y, atol=1e-14) and np.allclose(a.y_prime, b.y_prime, atol=1e-14)
    assert c.y.shape == (129, 2)


def test_leibniz_example():
    r = line_rp()
    t = r.grid.times
    a = ControlledPath(r, t, np.ones(65))
    u = leibniz_product(a, a)
    assert np.allclose(u.y[:, 0], t**2) and np.allclose(u.y_prime[:, 0, 0], 2 * t)
    measured = controlled_norms(u).seminorm
    assert measured == pytest.approx(3.0)
    assert leibniz_norm_bound(a, a) >= measured


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_bounds_dominate(seed):
    r = ito_lift(gen_fbm(0.45, seed, Grid.uniform(128), dim=2).path, 0.45)
    c = lift_function(tanh_field(2), r)
    f = sin_matrix_field(seed, n=2, d=2, scale=0.5)
    assert controlled_norms(compose(f, c)).seminorm <= compose_norm_bound(f, c)
    a = ControlledPath(r, c.y[:, 0], c.y_prime[:, 0])
    u = leibniz_product(a, c)
    assert controlled_norms(u).seminorm <= leibniz_norm_bound(a, c)


def test_compose_bound_scales_with_field():
    r = geometric_lift(gen_smooth("circle", Grid.uniform(64)), 0.45)
    c = lift_function(tanh_field(2), r)
    f1 = sin_matrix_field(1, scale=1.0)
    f2 = sin_matrix_field(1, scale=2.0)
    assert compose_norm_bound(f2, c) == pytest.approx(2 * compose_norm_bound(f1, c), rel=1e-12)
    with pytest.raises(BoundPreconditionViolated):
        compose_norm_bound(f1, c, m=0.5)
    big = c.scaled(100.0)
    with pytest.raises(BoundPreconditionViolated):
        compose_norm_bound(f1, big, m=1.0)


def test_remainder_cocycle():
    r = ito_lift(gen_fbm(0.4, 9, Grid.uniform(64), dim=2).path, 0.4)
    c = lift_function(tanh_field(2), r)
    for s, u, t in [(0, 20, 64), (3, 4, 50)]:
        lhs = c.remainder(s, t) - c.remainder(s, u) - c.remainder(u, t)
        dyp = c.y_prime[u] - c.y_prime[s]
        assert np.allclose(lhs, dyp @ r.increment(u, t), atol=1e-13)


def test_base_mismatch_and_json(tmp_path):
    r1 = line_rp(16)
    r2 = ito_lift(r1.path, 0.5)
    a = identity_path(r1)
    with pytest.raises(BaseMismatch):
        a - identity_path(r2)
    save_json(tmp_path / "c.json", a)
    back = load_json(tmp_path / "c.json", r1)
    assert np.array_equal(back.y, a.y) and np.array_equal(back.y_prime, a.y_prime)
    with pytest.raises(BaseMismatch):
        load_json(tmp_path / "c.json", r2)
