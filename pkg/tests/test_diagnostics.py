import numpy as np
import pytest

import dsrothe.diagnostics as diag
from dsrothe.diagnostics import (
    apriori_quantities,
    apriori_suite,
    increment_inequality,
    discrete_energy,
    first_increment_decay,
    identity_double_step_inner,
    identity_second_difference,
    run_validation,
    sweep_identity,
)
from dsrothe.problems import build_rod_problem, manufactured_problem, scalar_problem, sine_motion
from dsrothe.stepper import run_scheme
from dsrothe.timegrid import TimeGrid, polynomial_load, zero_load

from oracles.scalar_recursion import apriori_scalar, recursion


def test_double_step_inner_examples():
    a = np.array([1.0, -2.0])
    lhs, rhs = identity_double_step_inner(a, a, a)
    assert lhs == pytest.approx(0.0, abs=1e-15) and rhs == pytest.approx(0.0, abs=1e-15)
    lhs, rhs = identity_double_step_inner([1.0], [0.0], [0.0])
    assert lhs == pytest.approx(1.5) and rhs == pytest.approx(1.5)
    r = np.random.default_rng(0)
    worst = max(abs(np.subtract(*identity_double_step_inner(*r.standard_normal((3, 5))))) for _ in range(100))
    assert worst <= 1e-12


def test_second_difference_examples():
    a = np.array([0.3])
    assert identity_second_difference(a, a, a) == pytest.approx((0.0, 0.0), abs=1e-15)
    lhs, rhs = identity_second_difference([2.0], [1.0], [0.0])
    assert lhs == pytest.approx(0.0, abs=1e-15) and rhs == pytest.approx(0.0, abs=1e-15)


def test_increment_inequality_examples():
    lhs, rhs = increment_inequality([[2.0, 1.0]])
    assert lhs == pytest.approx(rhs)
    lhs, rhs = increment_inequality([[1.0]] * 10)
    assert lhs == pytest.approx(10.0) and rhs == pytest.approx(10.0)
    assert lhs <= 9 * rhs
    with pytest.raises(ValueError):
        increment_inequality([])


def test_zero_problem_bounds(zero):
    rep = apriori_suite(run_scheme(zero, TimeGrid(1.0, 8)))
    assert all(r.value == 0.0 for r in rep.records)


def test_apriori_independent_recomputation():
    p = scalar_problem(alpha=1.5, b=2.0, load=polynomial_load([[1.0], [0.5], [-0.25]]), u0=0.5, w0=1.0)
    tr = run_scheme(p, TimeGrid(1.0, 20))
    u, w = recursion(1.5, 2.0, 0.5, 1.0, 1.0, 20, [1.0, 0.5, -0.25])[1:]
    ref = apriori_scalar(u, w, 0.05)
    got = apriori_quantities(tr)
    for k, v in ref.items():
        assert got[k] == pytest.approx(v, rel=1e-10, abs=1e-12), k


def test_apriori_tau_uniform_on_smooth_instance(smooth_base):
    inst, _ = manufactured_problem(smooth_base, sine_motion([1.0, 0.5, -0.3]))
    qs = [apriori_quantities(run_scheme(inst, TimeGrid(1.0, N))) for N in (8, 16, 32, 64)]
    for k in qs[0]:
        assert all(q[k] <= 2 * qs[0][k] + 1e-14 for q in qs), k


def test_first_increment_decay_examples(zero, smooth_base):
    trs = [run_scheme(zero, TimeGrid(1.0, N)) for N in (8, 16, 32)]
    assert all(v == 0.0 for _, _, v in first_increment_decay(trs))
    inst, _ = manufactured_problem(smooth_base, sine_motion([1.0, 0.5, -0.3]))
    table = first_increment_decay(run_scheme(inst, TimeGrid(1.0, N)) for N in (16, 32, 64, 128))
    ratios = [a[2] / b[2] for a, b in zip(table, table[1:])]
    # the exact initial velocity makes the Euler increment O(tau)
    assert all(r >= 1.8 for r in ratios), ratios
    with pytest.raises(ValueError):
        first_increment_decay(trs[:2])


def test_energy_dissipation_rod():
    p = build_rod_problem(load=zero_load(8))
    tr = run_scheme(p, TimeGrid(1.0, 64))
    e = discrete_energy(tr, p.B)
    d = p.j.growth_d
    t = tr.grid.nodes[1:]
    assert np.all(e <= e[0] + 0.5 * d * d * t + 1e-8)


def test_validation_default_passes():
    results = run_validation(seed=0, sweep=200)
    assert all(r.passed for r in results), [r.line() for r in results]


def test_mutation_detected(monkeypatch):
    monkeypatch.setattr(diag, "DS_WEIGHTS", (1.0, -2.0, 0.5))
    res = sweep_identity(identity_double_step_inner, "ds-inner", 50, 0)
    assert not res.passed and res.witness is not None
    assert "witness" in res.line()
