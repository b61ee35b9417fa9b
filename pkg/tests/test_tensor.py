import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from redrough.errors import DimensionMismatch
from redrough.tensor import (
    antisymmetry_defect,
    apply_linmap,
    as_sym,
    compensated_cumsum,
    compensated_sum,
    outer,
    pair_bilinear,
    sym_outer,
    symmetrize,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def square(d):
    return arrays(np.float64, (d, d), elements=finite)


@pytest.mark.parametrize(
    "t, expected",
    [
        ([[0, 1], [0, 0]], [[0, 0.5], [0.5, 0]]),
        ([[2, 3], [3, 7]], [[2, 3], [3, 7]]),
        ([[1, 2], [4, 1]], [[1, 3], [3, 1]]),
    ],
)
def test_symmetrize_examples(t, expected):
    assert np.array_equal(symmetrize(t), np.array(expected, dtype=float))


@pytest.mark.parametrize(
    "u, v, expected",
    [((1, 0), (0, 1), [[0, 1], [0, 0]]), ((2,), (3,), [[6]]), ((1, 2), (3, 4), [[3, 4], [6, 8]])],
)
def test_outer_examples(u, v, expected):
    assert np.array_equal(outer(u, v), np.array(expected, dtype=float))


def test_outer_length_mismatch():
    with pytest.raises(DimensionMismatch):
        outer([1, 2], [1, 2, 3])


@pytest.mark.parametrize(
    "u, v, expected",
    [((1, 0), (0, 1), [[0, 0.5], [0.5, 0]]), ((1, 1), (1, 1), [[1, 1], [1, 1]]), ((1, 2), (3, 4), [[3, 5], [5, 8]])],
)
def test_sym_outer_examples(u, v, expected):
    assert np.array_equal(sym_outer(u, v), np.array(expected, dtype=float))


def test_pair_bilinear_examples():
    assert np.array_equal(pair_bilinear(np.zeros((3, 2, 2)), np.eye(2)), np.zeros(3))
    assert pair_bilinear([[[2.0]]], [[0.5]]).tolist() == [1.0]
    b = np.zeros((3, 2, 2))
    b[0, 0, 1] = b[0, 1, 0] = 1.0
    assert pair_bilinear(b, [[0, 0.5], [0.5, 0]]).tolist() == [1.0, 0.0, 0.0]
    with pytest.raises(DimensionMismatch):
        pair_bilinear(np.zeros((1, 2, 2)), np.zeros((3, 3)))


def test_apply_linmap_examples():
    assert apply_linmap(np.eye(2), [1, 2]).tolist() == [1, 2]
    assert apply_linmap(np.zeros((3, 2)), [1, 2]).tolist() == [0, 0, 0]
    assert apply_linmap([[1, 2], [3, 4]], [1, 1]).tolist() == [3, 7]
    with pytest.raises(DimensionMismatch):
        apply_linmap(np.eye(2), [1, 2, 3])


def test_as_sym_rejects_asymmetric():
    with pytest.raises(ValueError):
        as_sym([[0, 1], [0, 0]])
    s = as_sym([[1, 2], [2 + 1e-14, 1]])
    assert np.array_equal(s, s.T)


@given(square(3))
def test_symmetrize_idempotent(t):
    s = symmetrize(t)
    assert np.array_equal(symmetrize(s), s)


@given(square(3), square(3), finite, finite)
def test_symmetrize_linear(t1, t2, a, b):
    lhs = symmetrize(a * t1 + b * t2)
    rhs = a * symmetrize(t1) + b * symmetrize(t2)
    scale = 1.0 + np.max(np.abs(a * t1)) + np.max(np.abs(b * t2))
    assert np.max(np.abs(lhs - rhs)) <= 1e-14 * scale


@given(arrays(np.float64, (2, 3, 3), elements=finite), square(3))
def test_pair_bilinear_ignores_antisymmetric_part(b, t):
    s = symmetrize(t)
    full = pair_bilinear(b, s)
    part = pair_bilinear(symmetrize(b), s)
    scale = 1.0 + np.sum(np.abs(b)) * np.max(np.abs(s))
    assert np.max(np.abs(full - part)) <= 1e-14 * scale


@given(arrays(np.float64, 4, elements=finite), arrays(np.float64, 4, elements=finite))
def test_outer_transpose(u, v):
    assert np.array_equal(outer(u, v).T, outer(v, u))


def test_antisymmetry_defect():
    assert antisymmetry_defect(np.eye(3)) == 0.0
    assert antisymmetry_defect([[0, 1], [-1, 0]]) == pytest.approx(np.sqrt(2))


def test_compensated_sums_beat_naive():
    rng = np.random.default_rng(0)
    a = rng.normal(size=100_000) * 1e8 + 1e-3
    exact = float(np.sum(np.array(a, dtype=np.longdouble)))
    c = compensated_cumsum(a)
    assert c[0] == 0.0 and c.shape == (100_001,)
    assert abs(c[-1] - exact) <= abs(np.cumsum(a)[-1] - exact)
    bound = np.finfo(float).eps * np.log2(a.size) * np.sum(np.abs(a))
    assert abs(compensated_sum(a) - exact) <= bound
