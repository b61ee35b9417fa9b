import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from redrough.errors import IndexOutOfRange, InvalidExponent
from redrough.grid import (
    Grid,
    GridPath,
    TwoParamField,
    holder_seminorm,
    increment,
    pair_offsets,
    read_path_csv,
    sup_bound_from_holder,
    two_param_seminorm,
    write_path_csv,
)


def line(n=64, horizon=1.0):
    g = Grid.uniform(n, horizon)
    return GridPath(g, g.times[:, None])


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(np.array([0.1, 0.5]))
    with pytest.raises(ValueError):
        Grid(np.array([0.0, 0.5, 0.5]))
    with pytest.raises(ValueError):
        Grid(np.array([0.0]))
    g = Grid(np.array([0.0, 0.25, 1.0]))
    assert g.mesh() == 0.75 and g.n_steps == 2 and g.horizon == 1.0


def test_increment_examples():
    g = Grid.uniform(8)
    const = GridPath(g, np.full((9, 2), 3.0))
    assert np.all(const.increments(3) == 0)
    assert increment(line(8), 0, 8)[0] == 1.0
    sq = GridPath(Grid(np.array([0.0, 0.5, 1.0])), np.array([[0.0], [0.25], [1.0]]))
    assert increment(sq, 0, 1)[0] == 0.25
    assert np.all(increment(sq, 1, 1) == 0)
    with pytest.raises(IndexOutOfRange):
        increment(sq, 2, 1)
    with pytest.raises(IndexOutOfRange):
        increment(sq, 0, 3)


def test_holder_examples():
    g = Grid.uniform(16)
    assert holder_seminorm(GridPath(g, np.ones((17, 1))), 0.5).seminorm == 0.0
    rep = holder_seminorm(line(16), 0.5)
    assert rep.seminorm == pytest.approx(1.0, abs=1e-15) and rep.argmax_pair == (0, 16)
    assert rep.pair_budget == "all"
    assert holder_seminorm(line(16), 1.0).seminorm == pytest.approx(1.0, abs=1e-12)
    for bad in (0.0, -0.1, 1.5, float("nan")):
        with pytest.raises(InvalidExponent):
            holder_seminorm(line(4), bad)


def test_two_param_examples():
    g = Grid.uniform(32)
    zero = TwoParamField(g, lambda k: np.zeros((33 - k, 2, 2)), 2)
    assert two_param_seminorm(zero, 1.0).seminorm == 0.0
    t = g.times
    s = TwoParamField(g, lambda k: 0.5 * (t[k:] - t[:-k]) ** 2, 0)
    rep = two_param_seminorm(s, 1.0)
    assert rep.seminorm == pytest.approx(0.5, rel=1e-14) and rep.argmax_pair == (0, 32)
    r = TwoParamField(g, lambda k: 3.0 * (t[k:] - t[:-k]) ** 0.9, 0)
    assert two_param_seminorm(r, 0.9).seminorm == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(InvalidExponent):
        two_param_seminorm(zero, 2.5)


def test_dense_field_matches_value():
    g = Grid.uniform(4)
    table = np.arange(25.0).reshape(5, 5)
    f = TwoParamField.from_dense(g, table)
    assert f.value(1, 3) == table[1, 3]
    assert np.array_equal(f.diagonal(2), table[[0, 1, 2], [2, 3, 4]])


def test_sup_bound_examples():
    g = Grid.uniform(16)
    assert sup_bound_from_holder(GridPath(g, np.full((17, 1), -2.0)), 0.5) == 2.0
    assert sup_bound_from_holder(line(16), 0.5) == pytest.approx(1.0)
    p = GridPath(g, 2.0 + g.times[:, None])
    assert sup_bound_from_holder(p, 1.0) == pytest.approx(3.0)


def test_dyadic_policy_includes_full_interval():
    assert pair_offsets("dyadic", 10) == [1, 2, 4, 8, 10]
    p = line(5000)
    rep = holder_seminorm(p, 0.5)
    assert rep.pair_budget == "dyadic" and rep.argmax_pair == (0, 5000)


paths = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s))


@settings(max_examples=30, deadline=None)
@given(paths, st.floats(0.05, 1.0), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_holder_properties(rng, alpha, c):
    n = int(rng.integers(2, 60))
    times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.01, 0.2, size=n))])
    g = Grid(times)
    p = GridPath(g, np.cumsum(rng.normal(size=(n + 1, 2)), axis=0))
    rep = holder_seminorm(p, alpha)
    i, j = rep.argmax_pair
    att = np.linalg.norm(p.increment(i, j)) / (times[j] - times[i]) ** alpha
    assert rep.seminorm >= att - 1e-12
    for k in range(1, n + 1):
        q = np.linalg.norm(p.increments(k), axis=1) / (times[k:] - times[:-k]) ** alpha
        assert np.all(q <= rep.seminorm * (1 + 1e-12))
    scaled = holder_seminorm(p.scaled(c), alpha).seminorm
    assert scaled == pytest.approx(abs(c) * rep.seminorm, rel=1e-12)
    a, b = sorted(rng.choice(n + 1, size=2, replace=False))
    mid = (a + b) // 2
    assert np.array_equal(p.increment(a, b), p.values[b] - p.values[a])
    assert np.allclose(p.increment(a, b), p.increment(a, mid) + p.increment(mid, b), rtol=0, atol=1e-12)
    assert sup_bound_from_holder(p, alpha) >= np.max(np.linalg.norm(p.values, axis=1)) - 1e-12


def test_holder_monotone_in_alpha():
    rng = np.random.default_rng(4)
    g = Grid.uniform(100)
    p = GridPath(g, np.cumsum(rng.normal(size=(101, 1)), axis=0))
    vals = [holder_seminorm(p, a).seminorm for a in (0.2, 0.4, 0.6, 0.8, 1.0)]
    assert all(x <= y for x, y in zip(vals, vals[1:]))


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    g = Grid(np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 1, 10))]))
    p = GridPath(g, rng.normal(size=(11, 3)))
    f = tmp_path / "p.csv"
    write_path_csv(f, p)
    with open(f, newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "x0", "x1", "x2"]
    back = read_path_csv(f)
    assert np.array_equal(back.values, p.values) and np.array_equal(back.grid.times, g.times)
