import numpy as np
import pytest

from dsrothe.errors import SolverError
from dsrothe.inclusion import (
    PENALTY,
    SolveOptions,
    StepOperator,
    residual_distance,
    scalar_oracle_solve,
    solve_inclusion,
)
from dsrothe.problems import friction_potential, scalar_problem, zero_problem
from dsrothe.spaces import OperatorA

TAU = 0.1


def first_op(p, tau=TAU):
    return StepOperator.first(p.setting, p.A, p.B, p.j, tau)


def test_zero_root(scalar_abs):
    w, xi, res, _ = solve_inclusion(first_op(scalar_abs), [0.0])
    assert w[0] == 0.0 and xi[0] == pytest.approx(0.0, abs=1e-12) and res <= 1e-14


def test_slip_branch_closed_form(scalar_abs):
    w, xi, res, _ = solve_inclusion(first_op(scalar_abs), [1.0])
    assert w[0] == pytest.approx(9 / 11, abs=1e-10)
    assert xi[0] == pytest.approx(1.0, abs=1e-10)
    assert res <= 1e-8


def test_stick_branch(scalar_abs):
    w, xi, res, _ = solve_inclusion(first_op(scalar_abs), [0.05])
    assert w[0] == pytest.approx(0.0, abs=1e-12)
    assert xi[0] == pytest.approx(0.5, abs=1e-10)


def test_residual_distance_examples(scalar_abs):
    op = first_op(scalar_abs)
    assert residual_distance(op, [9 / 11], [1.0], [1.0]) <= 1e-14
    d = 1e-3
    assert residual_distance(op, [9 / 11 + d], [1.0], [1.0]) == pytest.approx(1.1 * d, rel=1e-9)
    assert residual_distance(op, [9 / 11], [3.0], [1.0]) >= PENALTY


def test_oracle_examples(scalar_abs):
    op = first_op(scalar_abs)
    w, xi = scalar_oracle_solve(op, [1.0])
    assert w[0] == pytest.approx(solve_inclusion(op, [1.0]).w[0], abs=1e-10)
    w, xi = scalar_oracle_solve(op, [-1.0])
    assert w[0] == pytest.approx(-9 / 11, abs=1e-10) and xi[0] == pytest.approx(-1.0, abs=1e-10)


@pytest.mark.parametrize("mass", ["first", "double"])
def test_oracle_sweep(scalar_abs, mass):
    p = scalar_abs
    op = first_op(p) if mass == "first" else StepOperator.double_step(p.setting, p.A, p.B, p.j, TAU)
    worst = max(abs(solve_inclusion(op, [b]).w[0] - scalar_oracle_solve(op, [b])[0][0])
                for b in np.linspace(-2, 2, 100))
    assert worst <= 1e-8


def test_nonmonotone_friction_matches_oracle():
    p = scalar_problem(alpha=1.0, law=friction_potential(0.5, 0.3, 5.0), growth_d=0.5)
    op = first_op(p, 0.05)
    for b in np.linspace(-1.0, 1.0, 41):
        sol = solve_inclusion(op, [b])
        wo, _ = scalar_oracle_solve(op, [b])
        assert sol.residual <= 1e-8
        # at small tau the step problem is strongly monotone: one root
        assert sol.w[0] == pytest.approx(wo[0], abs=1e-8)


def test_picard_strategy(scalar_abs):
    sol = solve_inclusion(first_op(scalar_abs), [1.0], opts=SolveOptions(strategy="picard", max_iters=500))
    assert sol.w[0] == pytest.approx(9 / 11, abs=1e-9)


def test_scalar_oracle_strategy(scalar_abs):
    sol = solve_inclusion(first_op(scalar_abs), [0.05], opts=SolveOptions(strategy="scalar-oracle"))
    assert sol.strategy == "scalar-oracle" and sol.residual <= 1e-12


def test_singular_jacobian_falls_back_to_picard(scalar_abs):
    p = scalar_abs
    # a Jacobian that cancels the mass term makes every Newton matrix singular
    bad = OperatorA(p.A.apply, p.A.growth_a, p.A.growth_b, p.A.coercive_alpha, p.A.coercive_beta,
                    jacobian=lambda v: np.array([[-1.0 / TAU]]), matrix=None, label="bad-jacobian")
    op = StepOperator.first(p.setting, bad, p.B, p.j, TAU)
    sol = solve_inclusion(op, [1.0], opts=SolveOptions(max_iters=500))
    assert "picard" in sol.note
    assert sol.w[0] == pytest.approx(9 / 11, abs=1e-9)


def test_nonconvergence_carries_best_iterate():
    p = scalar_problem(alpha=1.0, law=friction_potential(0.5, 0.3, 5.0), growth_d=0.5)
    op = first_op(p)
    with pytest.raises(SolverError) as exc:
        solve_inclusion(op, [0.7], opts=SolveOptions(max_iters=2, tol_residual=1e-30),
                        step=7)
    assert exc.value.step == 7
    assert exc.value.best_w is not None and np.isfinite(exc.value.best_residual)


def test_linear_shortcut():
    p = zero_problem(3)
    op = StepOperator.double_step(p.setting, p.A, p.B, p.j, 0.2)
    b = np.array([1.0, -2.0, 0.5])
    sol = solve_inclusion(op, b)
    assert sol.strategy == "linear"
    np.testing.assert_allclose(op.single_valued(sol.w), b, atol=1e-14)


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(strategy="magic")
    with pytest.raises(ValueError):
        SolveOptions(epsilon_ladder=(1e-4, 1e-2))
    with pytest.raises(ValueError):
        SolveOptions(damping=0.0)


def test_trace_records_each_rung(scalar_abs):
    sol = solve_inclusion(first_op(scalar_abs), [1.0])
    assert [t[0] for t in sol.trace] == [1e-2, 1e-4, 1e-6, 1e-8, 0.0]
