import numpy as np
import pytest

from redrough.drivers import (
    DriverSpec,
    fbm_covariance,
    gen_fbm,
    gen_piecewise_linear,
    gen_smooth,
)
from redrough.errors import DimensionMismatch, InvalidHurst, UnknownCurve
from redrough.grid import Grid


def test_smooth_curves():
    g = Grid.uniform(16)
    assert np.allclose(gen_smooth("line", g, v=[2.0, -1.0]).values, g.times[:, None] * [2.0, -1.0])
    c = gen_smooth("circle", g)
    assert c.values[0].tolist() == [1.0, 0.0]
    assert np.allclose(np.linalg.norm(c.values, axis=1), 1.0)
    assert gen_smooth("lissajous", g, a=3, b=2).values[0].tolist() == [0.0, 0.0]
    p = gen_smooth("polynomial", g, coeffs=[[1.0, 0.0, 2.0]])
    assert np.allclose(p.values[:, 0], 1 + 2 * g.times**2)
    with pytest.raises(UnknownCurve):
        gen_smooth("spiral", g)


def test_piecewise_linear():
    g = Grid.uniform(4)
    p = gen_piecewise_linear([0, 0.5, 1], [0, 1, 0], g)
    assert p.values[:, 0].tolist() == [0.0, 0.5, 1.0, 0.5, 0.0]
    with pytest.raises(DimensionMismatch):
        gen_piecewise_linear([0, 1], [[0], [1], [2]], g)
    with pytest.raises(ValueError):
        gen_piecewise_linear([0, 0], [0, 1], g)


@pytest.mark.parametrize("h", [0.3, 1 / 3, 0.51, 0.7])
def test_invalid_hurst(h):
    with pytest.raises(InvalidHurst):
        gen_fbm(h, 0, Grid.uniform(8))


def test_fbm_basics():
    g = Grid.uniform(256)
    a = gen_fbm(0.4, 7, g, dim=2)
    b = gen_fbm(0.4, 7, g, dim=2)
    assert np.all(a.path.values[0] == 0.0)
    assert np.array_equal(a.path.values, b.path.values)
    assert not np.array_equal(a.path.values, gen_fbm(0.4, 8, g, dim=2).path.values)
    assert a.method == "circulant"
    ch = gen_fbm(0.4, 7, Grid.uniform(64), method="cholesky")
    assert ch.method == "cholesky" and ch.path.values[0, 0] == 0.0
    with pytest.raises(ValueError):
        gen_fbm(0.4, 0, Grid(np.array([0.0, 0.1, 1.0])))


@pytest.mark.parametrize("method", ["circulant", "cholesky"])
@pytest.mark.parametrize("h", [0.4, 0.5])
def test_fbm_covariance(method, h):
    n, samples = 256, 10_000
    x = gen_fbm(h, 11, Grid.uniform(n), dim=samples, method=method).path.values
    idx = [32, 64, 128, 256]
    t = np.array(idx) / n
    emp = x[idx] @ x[idx].T / samples
    exact = fbm_covariance(h, t[:, None], t[None, :])
    assert np.linalg.norm(emp - exact) / np.linalg.norm(exact) <= 0.05


def test_horizon_scaling():
    h = 0.45
    x = gen_fbm(h, 3, Grid.uniform(128, 4.0), dim=10_000).path.values
    assert np.var(x[-1]) == pytest.approx(4.0 ** (2 * h), rel=0.05)


def test_driver_spec():
    spec = DriverSpec.from_dict({"kind": "fbm", "hurst": 0.45, "n_steps": 64, "seed": 2, "lift": "ito"})
    r = spec.rough_path()
    assert r.alpha == 0.45 and r.grid.n_steps == 64
    smooth = DriverSpec("smooth", n_steps=32, curve="circle").rough_path()
    assert smooth.alpha == 0.5 and smooth.dim == 2
    with pytest.raises(ValueError):
        DriverSpec("smooth", lift="levy").rough_path()
    with pytest.raises(ValueError):
        DriverSpec("noise").path()
