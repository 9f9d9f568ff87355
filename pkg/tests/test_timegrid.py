import math

import numpy as np
import pytest

from dsrothe.spaces import GalerkinSetting
from dsrothe.timegrid import (
    LoadSpec,
    TimeGrid,
    average_load,
    average_loads,
    constant_load,
    polynomial_load,
    select_initial_data,
    table_load,
)


def test_grid_basics():
    g = TimeGrid(1.0, 10)
    assert g.tau == pytest.approx(0.1)
    assert g.nodes[-1] == 1.0 and len(g.nodes) == 11
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 4)


def test_constant_load_reproduced():
    g = TimeGrid(1.0, 7)
    c = np.array([1.5, -2.0, 0.25])
    for n in range(1, 8):
        np.testing.assert_allclose(average_load(constant_load(c), g, n), c, rtol=1e-14)


def test_affine_load_examples():
    f = polynomial_load([[0.0], [1.0]])
    g = TimeGrid(1.0, 10)
    assert average_load(f, g, 2)[0] == pytest.approx(0.2, abs=1e-14)
    assert average_load(f, g, 1)[0] == pytest.approx(0.05, abs=1e-14)


def test_average_load_out_of_range():
    g = TimeGrid(1.0, 4)
    f = constant_load([1.0])
    for n in (0, 5):
        with pytest.raises(ValueError):
            average_load(f, g, n)


def test_average_loads_matches_single_calls():
    f = LoadSpec(lambda t: np.array([math.sin(3 * t), t ** 3]))
    g = TimeGrid(2.0, 9)
    rows = average_loads(f, g)
    for n in range(1, 10):
        np.testing.assert_allclose(rows[n - 1], average_load(f, g, n), rtol=1e-14, atol=1e-15)


def test_quadrature_exact_on_degree_seven():
    f = polynomial_load([[0.0]] * 7 + [[1.0]], quadrature_order=4)
    assert f.integrate(0.0, 1.0)[0] == pytest.approx(1 / 8, abs=1e-15)


def test_table_load_linear_interpolation():
    f = table_load([0.0, 1.0, 2.0], [[0.0], [2.0], [0.0]])
    assert f(0.5)[0] == pytest.approx(1.0)
    # piecewise linear: integrate per piece so the kink at t = 1 is honoured
    g = TimeGrid(2.0, 2)
    assert average_load(f, g, 1)[0] == pytest.approx(1.0, abs=1e-14)


def test_initial_data_examples():
    s = GalerkinSetting.identity(2)
    d = select_initial_data(s, [0, 0], [0, 0], TimeGrid(1.0, 100), 1.0)
    np.testing.assert_array_equal(d.w0_tau, [0, 0])
    w0 = np.array([0.6, 0.8])
    d = select_initial_data(s, [1, 2], w0, TimeGrid(1.0, 100), 10.0)
    np.testing.assert_array_equal(d.w0_tau, w0)
    assert not d.rescaled
    w0 = np.array([3.0, 4.0])
    d = select_initial_data(s, [1, 2], w0, TimeGrid(2.0, 2), 1.0)
    np.testing.assert_allclose(d.w0_tau, w0 / 5, rtol=1e-15)
    assert s.norm_v(d.w0_tau) == pytest.approx(1.0)
    np.testing.assert_array_equal(d.u0_tau, [1, 2])
    with pytest.raises(ValueError):
        select_initial_data(s, [0, 0], [0, 0], TimeGrid(1.0, 4), 0.0)
