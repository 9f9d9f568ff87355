import math

import numpy as np
import pytest

from dsrothe.errors import PreconditionError
from dsrothe.problems import (
    abs_friction_scalar,
    build_rod_problem,
    friction_potential,
    manufactured_problem,
    p1_matrices,
    polynomial_motion,
    sine_motion,
)


def test_p1_two_elements_by_hand():
    mass, stiff = p1_matrices(2)
    # h = 1/2, clamped left node removed
    np.testing.assert_allclose(mass, [[1 / 3, 1 / 12], [1 / 12, 1 / 6]], atol=1e-12)
    np.testing.assert_allclose(stiff, [[4.0, -2.0], [-2.0, 2.0]], atol=1e-12)


def test_p1_three_elements_by_hand():
    mass, stiff = p1_matrices(3)
    h = 1 / 3
    np.testing.assert_allclose(mass, h / 6 * np.array([[4, 1, 0], [1, 4, 1], [0, 1, 2]]), atol=1e-12)
    np.testing.assert_allclose(stiff, 1 / h * np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 1]]), atol=1e-12)


def test_mass_reproduces_linear_integral():
    mass, _ = p1_matrices(10)
    x = np.linspace(0, 1, 11)[1:]
    # the interpolant of x is exact in P1: integral of x^2 over [0, 1]
    assert x @ mass @ x == pytest.approx(1 / 3, rel=1e-12)


def test_rod_shapes_and_hypotheses():
    p = build_rod_problem(elements=5)
    assert p.setting.dim_v == 5 and p.setting.dim_u == 1
    assert p.hypotheses(32).passed
    with pytest.raises(ValueError):
        build_rod_problem(elements=1)


def test_rod_without_elasticity():
    p = build_rod_problem(elasticity=0.0)
    assert not p.B.matrix.any()


def test_friction_values():
    law = friction_potential(2.0, 1.0, 1.0)
    assert law.derivative(1.0) == pytest.approx(1 + math.exp(-1), abs=1e-12)
    assert law.derivative(-1.0) == pytest.approx(-(1 + math.exp(-1)), abs=1e-12)
    assert law.subdiff(0.0) == (-2.0, 2.0)
    # value integrates the derivative
    h = 1e-6
    assert (law.value(1.0 + h) - law.value(1.0 - h)) / (2 * h) == pytest.approx(law.derivative(1.0), rel=1e-8)


def test_friction_reduces_to_abs():
    law = friction_potential(1.0, 1.0, 3.0)
    for s in (-2.0, -0.1, 0.3, 4.0):
        assert law.value(s) == pytest.approx(abs(s))
        assert law.derivative(s) == pytest.approx(math.copysign(1.0, s))


def test_friction_parameter_order():
    with pytest.raises(ValueError):
        friction_potential(0.3, 0.5, 1.0)
    with pytest.raises(ValueError):
        friction_potential(0.5, 0.3, -1.0)


def test_friction_growth_bound():
    p = build_rod_problem(mu_static=0.7, mu_kinetic=0.2)
    assert p.j.growth_d == 0.7
    rep = p.hypotheses(64)
    assert rep["j.growth"].passed
    law = friction_potential(0.7, 0.2, 5.0)
    assert all(abs(law.derivative(s)) <= 0.7 for s in np.linspace(-3, 3, 601) if s != 0)


def test_manufactured_residual_load(smooth_base):
    inst, case = manufactured_problem(smooth_base, polynomial_motion([[1.0, 2.0, 3.0]]))
    c = np.array([1.0, 2.0, 3.0])
    # stationary motion: f = B u (the quadratic potential vanishes at zero velocity)
    np.testing.assert_allclose(case.f_residual(0.4), smooth_base.B.matrix @ c, atol=1e-12)
    np.testing.assert_allclose(inst.u0, c)


def test_manufactured_rejects_kinks(scalar_abs):
    # w = -sin t vanishes at t = 0
    with pytest.raises(PreconditionError, match="t=0"):
        manufactured_problem(scalar_abs, sine_motion([1.0], phase=math.pi / 2))
    # w = 4 cos 4t changes sign inside (0, 1)
    with pytest.raises(PreconditionError, match="crosses"):
        manufactured_problem(scalar_abs, sine_motion([1.0], omega=4.0))
    manufactured_problem(scalar_abs, sine_motion([1.0]))
