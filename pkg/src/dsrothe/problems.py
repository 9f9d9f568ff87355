"""Problem instances: small ODE systems, a viscoelastic rod with friction, manufactured cases."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import PreconditionError, SetupError
from .spaces import (
    GalerkinSetting,
    OperatorA,
    OperatorB,
    ScalarLaw,
    Superpotential,
    abs_law,
    linear_operator_a,
    quadratic_law,
    separable_superpotential,
    validate_hypotheses,
    zero_superpotential,
)
from .timegrid import LoadSpec, zero_load


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    setting: GalerkinSetting
    A: OperatorA
    B: OperatorB
    j: Superpotential
    load: LoadSpec
    u0: np.ndarray
    w0: np.ndarray
    label: str = ""
    cap_C: float = 1e3

    def __post_init__(self):
        n = self.setting.dim_v
        for name in ("u0", "w0"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if v.shape != (n,):
                raise SetupError(f"{name} has length {v.size}, expected {n}")
            object.__setattr__(self, name, v)
        if self.B.matrix.shape != (n, n):
            raise SetupError(f"B has shape {self.B.matrix.shape}, expected {(n, n)}")
        if self.j.laws is not None and len(self.j.laws) != self.setting.dim_u:
            raise SetupError("number of scalar laws must equal dim_u")
        f0 = self.load(0.0)
        if f0.shape != (n,):
            raise SetupError(f"load returns shape {f0.shape}, expected {(n,)}")

    def hypotheses(self, samples: int = 64, seed: int = 0):
        return validate_hypotheses(self.setting, self.A, self.B, self.j, samples, seed)


def friction_potential(mu_static: float, mu_kinetic: float, slope: float) -> ScalarLaw:
    """Nonmonotone slip-weakening friction: derivative decays from mu_static to mu_kinetic.

    ``j(s) = mu_k |s| + (mu_s - mu_k)(1 - exp(-slope |s|)) / slope``.
    """
    if not (mu_static >= mu_kinetic > 0):
        raise ValueError(f"need mu_static >= mu_kinetic > 0, got {mu_static}, {mu_kinetic}")
    if slope < 0:
        raise ValueError("slope must be nonnegative")
    drop = mu_static - mu_kinetic

    def value(s):
        a = abs(s)
        if slope == 0:
            return mu_static * a
        return mu_kinetic * a + drop * (-math.expm1(-slope * a)) / slope

    def derivative(s):
        if s == 0:
            return 0.0
        return math.copysign(mu_kinetic + drop * math.exp(-slope * abs(s)), s)

    def second(s):
        return -slope * drop * math.exp(-slope * abs(s))

    return ScalarLaw(value, derivative, ((0.0, -mu_static, mu_static),), second, "friction")


def friction_superpotential(mu_static, mu_kinetic, slope) -> Superpotential:
    return separable_superpotential([friction_potential(mu_static, mu_kinetic, slope)], growth_d=mu_static,
                                    label="friction")


def p1_matrices(elements: int):
    """Mass and stiffness of P1 elements on [0, 1], left node removed (clamped)."""
    if elements < 2:
        raise ValueError("elements must be >= 2")
    h = 1.0 / elements
    n = elements + 1
    mass = np.zeros((n, n))
    stiff = np.zeros((n, n))
    me = h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    ke = 1.0 / h * np.array([[1.0, -1.0], [-1.0, 1.0]])
    for e in range(elements):
        idx = np.ix_([e, e + 1], [e, e + 1])
        mass[idx] += me
        stiff[idx] += ke
    return mass[1:, 1:], stiff[1:, 1:]


def build_rod_problem(elements: int = 8, viscosity: float = 1.0, elasticity: float = 1.0,
                      mu_static: float = 0.5, mu_kinetic: float = 0.3, slope: float = 5.0,
                      load: Optional[LoadSpec] = None, u0=None, w0=None, label: str = "rod") -> ProblemInstance:
    """Clamped viscoelastic rod on [0, 1] with friction at the free right end.

    V is P1 with the H^1 Gram (stiffness + mass), H the L^2 mass Gram, U = R
    via evaluation at x = 1.  Default load: ``cos(2 pi t) * mass @ 1``;
    default initial velocity ``sin(pi x / 2)`` at the nodes.
    """
    if elements < 2:
        raise ValueError("elements must be >= 2")
    mass, stiff = p1_matrices(elements)
    trace = np.zeros((1, elements))
    trace[0, -1] = 1.0
    setting = GalerkinSetting(stiff + mass, mass, trace, np.eye(1))
    # sharp alpha for <K v, v> >= alpha (v, v)_V, beta = 0
    A = linear_operator_a(setting, viscosity * stiff, label="viscosity")
    B = OperatorB(elasticity * stiff)
    j = friction_superpotential(mu_static, mu_kinetic, slope)
    x = np.linspace(0.0, 1.0, elements + 1)[1:]
    if load is None:
        ones = mass @ np.ones(elements)
        load = LoadSpec(lambda t: math.cos(2 * math.pi * t) * ones, 4, "rod-cos")
    if u0 is None:
        u0 = np.zeros(elements)
    if w0 is None:
        w0 = np.sin(0.5 * math.pi * x)
    return ProblemInstance(setting, A, B, j, load, u0, w0, label)


def linear_problem(setting: GalerkinSetting, a_matrix, b_matrix, j: Optional[Superpotential] = None,
                   load: Optional[LoadSpec] = None, u0=None, w0=None, label: str = "linear",
                   alpha: float | None = None, beta: float = 0.0) -> ProblemInstance:
    n = setting.dim_v
    A = linear_operator_a(setting, a_matrix, alpha=alpha, beta=beta)
    B = OperatorB(b_matrix)
    j = j if j is not None else zero_superpotential(setting.dim_u)
    load = load if load is not None else zero_load(n)
    u0 = np.zeros(n) if u0 is None else u0
    w0 = np.zeros(n) if w0 is None else w0
    return ProblemInstance(setting, A, B, j, load, u0, w0, label)


def scalar_problem(alpha: float = 1.0, b: float = 0.0, law: Optional[ScalarLaw] = None, growth_d: float = 1.0,
                   load: Optional[LoadSpec] = None, u0: float = 0.0, w0: float = 0.0,
                   label: str = "scalar") -> ProblemInstance:
    """V = H = U = R with unit Grams, ``A = alpha``, ``B = b``."""
    setting = GalerkinSetting.identity(1)
    j = separable_superpotential([law], growth_d) if law is not None else zero_superpotential(1)
    return linear_problem(setting, [[alpha]], [[b]], j, load, [u0], [w0], label)


def abs_friction_scalar(alpha: float = 1.0, **kw) -> ProblemInstance:
    return scalar_problem(alpha, law=abs_law(1.0), growth_d=1.0, label="scalar-abs", **kw)


def zero_problem(dim_v: int = 2) -> ProblemInstance:
    s = GalerkinSetting.identity(dim_v)
    return linear_problem(s, np.eye(dim_v), np.zeros((dim_v, dim_v)), label="zero")


# -- manufactured solutions ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExactMotion:
    """Displacement with its first and second time derivatives."""

    u: Callable[[float], np.ndarray]
    w: Callable[[float], np.ndarray]
    dw: Callable[[float], np.ndarray]
    label: str = ""


def polynomial_motion(coefficients) -> ExactMotion:
    """``u(t) = sum_k coefficients[k] t^k`` (rows are per-power V-vectors)."""
    c = np.atleast_2d(np.asarray(coefficients, dtype=float))

    def poly(cs, t):
        return sum(ck * t ** k for k, ck in enumerate(cs)) if len(cs) else np.zeros(c.shape[1])

    d1 = np.array([k * c[k] for k in range(1, len(c))])
    d2 = np.array([k * d1[k] for k in range(1, len(d1))])
    return ExactMotion(lambda t: poly(c, t), lambda t: poly(d1, t), lambda t: poly(d2, t),
                       f"poly{len(c) - 1}")


def sine_motion(mode, omega: float = 1.0, phase: float = 0.0) -> ExactMotion:
    """``u(t) = sin(omega t + phase) * mode``."""
    phi = np.asarray(mode, dtype=float).copy()
    return ExactMotion(
        lambda t: math.sin(omega * t + phase) * phi,
        lambda t: omega * math.cos(omega * t + phase) * phi,
        lambda t: -omega ** 2 * math.sin(omega * t + phase) * phi,
        "sine",
    )


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    u_exact: Callable
    w_exact: Callable
    f_residual: LoadSpec
    exact_xi: Callable


def manufactured_problem(base: ProblemInstance, motion: ExactMotion, horizon: float = 1.0,
                         samples: int = 257, quadrature_order: int = 4):
    """Replace the load by the residual of the exact motion; initial data from it.

    The potential must be smooth along ``trace w_exact(t)``; a kink hit on
    the sample grid of ``[0, horizon]`` raises :class:`PreconditionError`.
    """
    s, A, B, j = base.setting, base.A, base.B, base.j
    if j.laws is None and not j.is_zero:
        raise PreconditionError("manufactured problems need a separable or zero potential")

    def xi_of(t):
        z = s.trace @ motion.w(t)
        if j.is_zero:
            return np.zeros(s.dim_u)
        return np.array([law.derivative(float(zk)) for law, zk in zip(j.laws, z)])

    if not j.is_zero:
        ts = np.linspace(0.0, horizon, samples)
        zs = np.array([s.trace @ motion.w(t) for t in ts])
        for k, law in enumerate(j.laws):
            for loc in law.kink_locations:
                d = zs[:, k] - loc
                hit = np.flatnonzero(np.abs(d) <= 1e-9 * (1.0 + abs(loc)))
                if hit.size:
                    raise PreconditionError(f"potential is nonsmooth along the exact path at t={ts[hit[0]]:.6g}")
                cross = np.flatnonzero(np.sign(d[:-1]) != np.sign(d[1:]))
                if cross.size:
                    i = cross[0]
                    raise PreconditionError(
                        f"exact path crosses a kink between t={ts[i]:.6g} and t={ts[i + 1]:.6g}")

    def f(t):
        return s.gram_h @ motion.dw(t) + A(motion.w(t)) + B(motion.u(t)) + s.trace.T @ xi_of(t)

    load = LoadSpec(f, quadrature_order, "manufactured-" + motion.label)
    inst = replace(base, load=load, u0=motion.u(0.0), w0=motion.w(0.0),
                   label=f"{base.label}/{motion.label}")
    return inst, ManufacturedCase(motion.u, motion.w, load, xi_of)


def smooth_linear_base(dim: int = 3, seed: int = 7, stiffness: float = 0.5) -> ProblemInstance:
    """Small SPD system with a smooth quadratic potential on one trace component.

    Used by the manufactured studies.
    """
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((dim, dim))
    gram_v = q @ q.T + dim * np.eye(dim)
    r = rng.standard_normal((dim, dim))
    gram_h = r @ r.T / dim + np.eye(dim)
    trace = np.zeros((1, dim))
    trace[0, 0] = 1.0
    setting = GalerkinSetting(gram_v, gram_h, trace, np.eye(1))
    a = 0.5 * gram_v + 0.1 * (q - q.T)
    b = gram_v
    j = separable_superpotential([quadratic_law(stiffness)], growth_d=stiffness)
    return linear_problem(setting, a, b, j, label="smooth-linear")
