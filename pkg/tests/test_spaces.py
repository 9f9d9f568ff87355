import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dsrothe.errors import SetupError
from dsrothe.spaces import (
    GalerkinSetting,
    IntervalSet,
    OperatorB,
    VertexSet,
    abs_law,
    dual_norm,
    linear_operator_a,
    separable_superpotential,
    validate_hypotheses,
    with_cubic_damping,
    zero_superpotential,
)


def test_dual_norm_examples():
    s = GalerkinSetting.identity(2)
    assert dual_norm(s, [0.0, 0.0]) == 0.0
    assert dual_norm(s, [3.0, 4.0]) == pytest.approx(5.0, abs=1e-14)
    s4 = GalerkinSetting(np.diag([4.0, 1.0]), np.eye(2), [[1.0, 0.0]], np.eye(1))
    assert dual_norm(s4, [2.0, 0.0]) == pytest.approx(1.0, abs=1e-14)


def test_dual_norm_wrong_length():
    with pytest.raises(ValueError):
        dual_norm(GalerkinSetting.identity(2), [1.0, 2.0, 3.0])


def test_non_spd_gram_names_matrix():
    with pytest.raises(SetupError, match="gram_h"):
        GalerkinSetting(np.eye(2), np.diag([1.0, -1.0]), [[1.0, 0.0]], np.eye(1))
    with pytest.raises(SetupError, match="gram_v"):
        GalerkinSetting(np.zeros((2, 2)), np.eye(2), [[1.0, 0.0]], np.eye(1))


def _random_setting(seed, d):
    r = np.random.default_rng(seed)
    q = r.standard_normal((d, d))
    p = r.standard_normal((d, d))
    return GalerkinSetting(q @ q.T + d * np.eye(d), p @ p.T / d + np.eye(d), r.standard_normal((1, d)), np.eye(1))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(1, 6))
def test_dual_norm_is_sup_over_unit_ball(seed, d):
    s = _random_setting(seed, d)
    l = np.random.default_rng(seed + 1).standard_normal(d)
    v = s.riesz(l)
    # the Riesz vector attains the sup of <l, v>/||v||_V
    assert l @ v / s.norm_v(v) == pytest.approx(dual_norm(s, l), rel=1e-10)
    other = np.random.default_rng(seed + 2).standard_normal(d)
    assert abs(l @ other) <= dual_norm(s, l) * s.norm_v(other) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(1, 6), k=st.floats(-5, 5))
def test_norms_homogeneous(seed, d, k):
    s = _random_setting(seed, d)
    v = np.random.default_rng(seed).standard_normal(d)
    for fn in (s.norm_v, s.norm_h, s.dual_norm):
        assert fn(k * v) == pytest.approx(abs(k) * fn(v), rel=1e-12, abs=1e-14)


def test_identity_coercivity_and_zero_b():
    s = GalerkinSetting.identity(3)
    A = linear_operator_a(s, s.gram_v, alpha=1.0, beta=0.0)
    rep = validate_hypotheses(s, A, OperatorB(np.zeros((3, 3))), zero_superpotential(1))
    assert rep.passed
    assert rep["A.coercivity"].margin >= -1e-12
    assert rep["B.symmetric"].passed and rep["B.positive"].passed


def test_abs_law_growth_passes():
    s = GalerkinSetting.identity(1)
    A = linear_operator_a(s, [[1.0]])
    j = separable_superpotential([abs_law(1.0)], growth_d=1.0)
    assert j.subdiff([0.0]).contains([1.0]) and j.subdiff([0.0]).contains([-1.0])
    rep = validate_hypotheses(s, A, OperatorB([[0.0]]), j)
    assert rep["j.growth"].passed
    assert rep["j.smoothing_limit"].passed


def test_growth_violation_reports_witness():
    s = GalerkinSetting.identity(1)
    A = linear_operator_a(s, [[1.0]])
    j = separable_superpotential([abs_law(3.0)], growth_d=1.0)
    rep = validate_hypotheses(s, A, OperatorB([[0.0]]), j)
    assert not rep["j.growth"].passed
    assert rep["j.growth"].witness is not None


def test_overstated_alpha_fails_coercivity():
    s = GalerkinSetting.identity(2)
    A = linear_operator_a(s, np.eye(2), alpha=2.0)
    rep = validate_hypotheses(s, A, OperatorB(np.eye(2)), zero_superpotential(1))
    assert not rep["A.coercivity"].passed


def test_nonsymmetric_b_fails():
    s = GalerkinSetting.identity(2)
    A = linear_operator_a(s, np.eye(2))
    rep = validate_hypotheses(s, A, OperatorB([[1.0, 1.0], [0.0, 1.0]]), zero_superpotential(1))
    assert not rep["B.symmetric"].passed


def test_smooth_grad_converges_into_subdiff():
    j = separable_superpotential([abs_law(1.0)], growth_d=1.0)
    for z in (-0.3, 0.0, 1e-7, 2.0):
        d = [j.subdiff([z]).distance(j.smooth_grad([z], e)) for e in (1e-2, 1e-4, 1e-6, 1e-8)]
        assert d[-1] <= 1e-8
        assert all(b <= a + 1e-15 for a, b in zip(d, d[1:]))


def test_interval_and_vertex_sets():
    box = IntervalSet([-1.0, 0.0], [1.0, 2.0])
    assert box.contains([0.5, 1.0]) and not box.contains([2.0, 1.0])
    assert box.distance([2.0, 1.0]) == pytest.approx(1.0)
    tri = VertexSet([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert tri.contains([0.2, 0.2])
    assert tri.distance([1.0, 1.0]) == pytest.approx(math.sqrt(0.5), abs=1e-9)


def test_cubic_damping_extension_is_monotone():
    s = GalerkinSetting.identity(2)
    base = linear_operator_a(s, np.eye(2))
    A = with_cubic_damping(s, base, 0.5)
    r = np.random.default_rng(0)
    for _ in range(20):
        x, y = r.standard_normal((2, 2))
        assert (A(x) - A(y)) @ (x - y) >= -1e-12
    assert "extension" in A.label
