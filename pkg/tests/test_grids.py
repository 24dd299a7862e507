import numpy as np
import pytest

from mallowslab.grids import (GridFunction2D, cumulative_trapezoid2d,
                              integrate2d, trapezoid_weights)


def test_trapezoid_weights_sum_to_length():
    for n in (2, 3, 17, 100):
        w = trapezoid_weights(n, 1.0 / (n - 1))
        assert abs(w.sum() - 1.0) < 1e-14
        assert w[0] == w[-1]
        if n > 2:
            assert w[0] == w[1] / 2


def test_integrate2d_exact_on_bilinear():
    # trapezoid rule integrates bilinear functions exactly
    xs = np.linspace(0.0, 1.0, 13)
    ys = np.linspace(0.0, 1.0, 9)
    vals = 2.0 + 3.0 * xs[:, None] + 5.0 * ys[None, :] - 7.0 * np.outer(xs, ys)
    got = integrate2d(vals, xs[1] - xs[0], ys[1] - ys[0])
    assert abs(got - (2.0 + 1.5 + 2.5 - 7.0 / 4.0)) < 1e-13


def test_cumulative_matches_total():
    rng = np.random.default_rng(5)
    vals = rng.random((21, 33))
    hx, hy = 1.0 / 20, 1.0 / 32
    cum = cumulative_trapezoid2d(vals, hx, hy)
    assert cum[0, 0] == 0.0
    assert abs(cum[-1, -1] - integrate2d(vals, hx, hy)) < 1e-13


def test_cumulative_is_running_quadrature():
    rng = np.random.default_rng(6)
    vals = rng.random((15, 15))
    hx = hy = 1.0 / 14
    cum = cumulative_trapezoid2d(vals, hx, hy)
    i, j = 9, 4
    direct = integrate2d(vals[: i + 1, : j + 1], hx, hy)
    assert abs(cum[i, j] - direct) < 1e-13


def test_grid_container_round_trip():
    g = GridFunction2D.from_callable(lambda x, y: x + 2 * y, 5, 7, lx=2.0, ly=3.0)
    assert g.values.shape == (5, 7)
    xg, yg = g.meshes()
    assert np.allclose(g.values, xg + 2 * yg)
    assert g.hx == pytest.approx(0.5)
    h = g.with_values(np.zeros((5, 7)))
    assert h.lx == g.lx and h.values.sum() == 0.0


def test_grid_container_validation():
    with pytest.raises(ValueError):
        GridFunction2D(3, 3, 1.0, 1.0, np.zeros((3, 4)))
    with pytest.raises(ValueError):
        GridFunction2D(0, 3, 1.0, 1.0, np.zeros((0, 3)))
    single = GridFunction2D(1, 3, 1.0, 1.0, np.zeros((1, 3)))
    with pytest.raises(ValueError):
        single.hx
