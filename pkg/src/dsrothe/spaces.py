"""Finite-dimensional evolution triple, operators and superpotentials.

Vectors of V, H and V* share one coordinate basis.  The duality pairing is
the plain dot product, ``gram_h`` represents ``i* i`` and ``trace`` represents
the operator from V to U, so adjoints are matrix transposes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import nnls

from .errors import SetupError

MEMBERSHIP_TOL = 1e-9
MARGIN_TOL = -1e-10
KINK_TOL = 1e-12


def _as_matrix(a, name, shape=None):
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if shape is not None and m.shape != shape:
        raise SetupError(f"{name} has shape {m.shape}, expected {shape}")
    if not np.all(np.isfinite(m)):
        raise SetupError(f"{name} has non-finite entries")
    return m


def _check_spd(m, name):
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise SetupError(f"{name} is not symmetric")
    eig = np.linalg.eigvalsh(0.5 * (m + m.T))
    if eig[0] <= 0.0:
        raise SetupError(f"{name} is not positive definite (min eigenvalue {eig[0]:.3e})")
    try:
        return sla.cho_factor(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigen check catches this
        raise SetupError(f"{name}: Cholesky factorization failed") from exc


@dataclass(frozen=True, eq=False)
class GalerkinSetting:
    """Gram matrices of V, H, U and the trace operator V -> U."""

    gram_v: np.ndarray
    gram_h: np.ndarray
    trace: np.ndarray
    gram_u: np.ndarray
    _chol_v: tuple = field(init=False, repr=False)
    _chol_h: tuple = field(init=False, repr=False)
    _chol_u: tuple = field(init=False, repr=False)

    def __post_init__(self):
        gv = _as_matrix(self.gram_v, "gram_v")
        n = gv.shape[0]
        gv = _as_matrix(gv, "gram_v", (n, n))
        gh = _as_matrix(self.gram_h, "gram_h", (n, n))
        tr = np.asarray(self.trace, dtype=float)
        if tr.ndim == 1:
            tr = tr.reshape(1, -1)
        tr = _as_matrix(tr, "trace")
        if tr.shape[1] != n:
            raise SetupError(f"trace has {tr.shape[1]} columns, expected dim_v={n}")
        gu = _as_matrix(self.gram_u, "gram_u", (tr.shape[0], tr.shape[0]))
        for name, m in (("gram_v", gv), ("gram_h", gh), ("trace", tr), ("gram_u", gu)):
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        object.__setattr__(self, "_chol_v", _check_spd(gv, "gram_v"))
        object.__setattr__(self, "_chol_h", _check_spd(gh, "gram_h"))
        object.__setattr__(self, "_chol_u", _check_spd(gu, "gram_u"))

    @classmethod
    def identity(cls, dim_v: int, dim_u: int = 1, trace=None) -> "GalerkinSetting":
        """All Gram matrices equal to the identity; default trace picks coordinate 0."""
        if trace is None:
            trace = np.zeros((dim_u, dim_v))
            for k in range(min(dim_u, dim_v)):
                trace[k, k] = 1.0
        return cls(np.eye(dim_v), np.eye(dim_v), trace, np.eye(dim_u))

    @property
    def dim_v(self) -> int:
        return self.gram_v.shape[0]

    @property
    def dim_u(self) -> int:
        return self.trace.shape[0]

    def riesz(self, l):
        """Solve ``gram_v x = l`` with the cached factorization."""
        return sla.cho_solve(self._chol_v, np.asarray(l, dtype=float))

    def norm_v(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return math.sqrt(max(float(v @ self.gram_v @ v), 0.0))

    def norm_h(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return math.sqrt(max(float(v @ self.gram_h @ v), 0.0))

    def norm_u(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return math.sqrt(max(float(z @ self.gram_u @ z), 0.0))

    def norm_ustar(self, xi) -> float:
        xi = np.asarray(xi, dtype=float)
        return math.sqrt(max(float(xi @ sla.cho_solve(self._chol_u, xi)), 0.0))

    def dual_norm(self, l) -> float:
        return dual_norm(self, l)

    def embed(self, v):
        """The V* representative ``i* i v`` of a V-vector."""
        return self.gram_h @ np.asarray(v, dtype=float)

    def trace_embedding_constant(self, eps: float) -> float:
        """Smallest c with ``||trace v||_U^2 <= eps ||v||^2 + c |v|^2`` for all v.

        Computed as the largest generalized eigenvalue of
        ``(trace^T gram_u trace - eps gram_v, gram_h)``, clipped at zero.
        """
        tu = self.trace.T @ self.gram_u @ self.trace
        lam = sla.eigh(tu - eps * self.gram_v, self.gram_h, eigvals_only=True)
        return max(float(lam[-1]), 0.0)


def dual_norm(setting: GalerkinSetting, l) -> float:
    """V*-norm ``sqrt(l^T gram_v^{-1} l)``."""
    l = np.asarray(l, dtype=float)
    if l.shape != (setting.dim_v,):
        raise ValueError(f"expected a V*-vector of length {setting.dim_v}, got shape {l.shape}")
    return math.sqrt(max(float(l @ setting.riesz(l)), 0.0))


# -- convex sets returned by subdifferentials ---------------------------------


@dataclass(frozen=True)
class IntervalSet:
    """Box ``[lo_k, hi_k]`` per component."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, dtype=float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, dtype=float)))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def distance(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def extreme_points(self, limit: int = 12):
        k = len(self.lo)
        if k > limit:
            return [self.lo, self.hi]
        return [np.array(c) for c in product(*zip(self.lo, self.hi))]


@dataclass(frozen=True)
class VertexSet:
    """Convex hull of a finite vertex list (rows of ``vertices``)."""

    vertices: np.ndarray

    def _weights(self, x):
        v = np.asarray(self.vertices, dtype=float)
        big = 1e4 * (1.0 + np.abs(v).max())
        a = np.vstack([v.T, big * np.ones(v.shape[0])])
        rhs = np.concatenate([np.asarray(x, dtype=float), [big]])
        lam, _ = nnls(a, rhs)
        return lam

    def project(self, x):
        lam = self._weights(x)
        return lam @ np.asarray(self.vertices, dtype=float)

    def distance(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.project(x)))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.distance(x) <= tol

    def extreme_points(self, limit: int = 12):
        return list(np.asarray(self.vertices, dtype=float))


# -- scalar laws and superpotentials -----------------------------------------


@dataclass(frozen=True)
class ScalarLaw:
    """Piecewise-smooth scalar potential with finitely many kinks.

    ``derivative`` must be valid away from kinks; ``kinks`` lists
    ``(location, left_limit, right_limit)`` of the derivative.  The Clarke
    subdifferential at a kink is the interval between the one-sided limits.
    """

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    kinks: tuple = ()
    second_derivative: Optional[Callable[[float], float]] = None
    label: str = ""

    def _near_kink(self, s, radius):
        best = None
        for k in self.kinks:
            dist = abs(s - k[0])
            if dist <= radius and (best is None or dist < abs(s - best[0])):
                best = k
        return best

    def subdiff(self, s: float):
        # trace values within KINK_TOL of a kink count as the kink (round-off of pinned solves)
        for loc, left, right in self.kinks:
            if abs(s - loc) <= KINK_TOL * (1.0 + abs(loc)):
                return min(left, right), max(left, right)
        g = self.derivative(s)
        return g, g

    def smooth(self, s: float, eps: float) -> float:
        # C^1 ramp of the potential: linear blend of the derivative over [k - eps, k + eps]
        k = self._near_kink(s, eps)
        if k is None:
            return self.derivative(s)
        loc = k[0]
        gl = self.derivative(loc - eps)
        gr = self.derivative(loc + eps)
        return gl + (gr - gl) * (s - loc + eps) / (2.0 * eps)

    def smooth_slope(self, s: float, eps: float) -> float:
        k = self._near_kink(s, eps)
        if k is not None:
            loc = k[0]
            return (self.derivative(loc + eps) - self.derivative(loc - eps)) / (2.0 * eps)
        return self.curvature(s)

    def curvature(self, s: float) -> float:
        if self.second_derivative is not None:
            return self.second_derivative(s)
        h = 1e-7 * (1.0 + abs(s))
        return (self.derivative(s + h) - self.derivative(s - h)) / (2.0 * h)

    @property
    def kink_locations(self):
        return tuple(k[0] for k in self.kinks)


def zero_law() -> ScalarLaw:
    return ScalarLaw(lambda s: 0.0, lambda s: 0.0, (), lambda s: 0.0, "zero")


def abs_law(scale: float = 1.0) -> ScalarLaw:
    """``scale * |s|`` with subdifferential ``[-scale, scale]`` at 0."""
    return ScalarLaw(
        lambda s: scale * abs(s),
        lambda s: scale * math.copysign(1.0, s) if s != 0 else 0.0,
        ((0.0, -scale, scale),),
        lambda s: 0.0,
        "abs",
    )


def quadratic_law(stiffness: float) -> ScalarLaw:
    """Smooth ``stiffness * s^2 / 2``."""
    return ScalarLaw(
        lambda s: 0.5 * stiffness * s * s,
        lambda s: stiffness * s,
        (),
        lambda s: stiffness,
        "quadratic",
    )


@dataclass(frozen=True, eq=False)
class Superpotential:
    """Potential ``j`` on U with its Clarke subdifferential and a smoothing.

    ``subdiff(z)`` returns an :class:`IntervalSet` or :class:`VertexSet`;
    ``smooth_grad(z, eps)`` is a single-valued selection converging into
    ``subdiff(z)`` as ``eps -> 0``.  For separable potentials ``laws`` holds
    one :class:`ScalarLaw` per component; the step solver uses it to certify
    kink (sticking) solutions exactly.
    """

    value: Callable
    subdiff: Callable
    smooth_grad: Callable
    growth_d: float
    smooth_grad_jac: Optional[Callable] = None
    laws: Optional[tuple] = None
    is_zero: bool = False
    smooth_sampler: Optional[Callable] = None
    label: str = ""

    @property
    def kinks(self):
        if self.laws is None:
            return None
        return [law.kink_locations for law in self.laws]


def separable_superpotential(laws: Sequence[ScalarLaw], growth_d: float, label: str = "") -> Superpotential:
    """``j(z) = sum_k law_k(z_k)``."""
    laws = tuple(laws)

    def value(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return float(sum(law.value(float(s)) for law, s in zip(laws, z)))

    def subdiff(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        pairs = [law.subdiff(float(s)) for law, s in zip(laws, z)]
        return IntervalSet(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    def smooth_grad(z, eps):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.array([law.smooth(float(s), eps) for law, s in zip(laws, z)])

    def smooth_grad_jac(z, eps):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.diag([law.smooth_slope(float(s), eps) for law, s in zip(laws, z)])

    def smooth_sampler(rng, n):
        out = []
        while len(out) < n:
            z = rng.uniform(-3.0, 3.0, size=len(laws))
            if all(min((abs(s - k) for k in law.kink_locations), default=np.inf) > 1e-3
                   for law, s in zip(laws, z)):
                out.append(z)
        return out

    zero = all(law.label == "zero" for law in laws)
    return Superpotential(value, subdiff, smooth_grad, float(growth_d), smooth_grad_jac, laws,
                          zero, smooth_sampler, label or "+".join(law.label for law in laws))


def zero_superpotential(dim_u: int) -> Superpotential:
    return separable_superpotential([zero_law()] * dim_u, growth_d=1.0, label="zero")


# -- operators -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorA:
    """Viscosity-type operator V -> V* with declared growth/coercivity constants.

    ``matrix`` is set for linear operators and lets the solver skip Newton.
    """

    apply: Callable
    growth_a: float
    growth_b: float
    coercive_alpha: float
    coercive_beta: float
    jacobian: Optional[Callable] = None
    matrix: Optional[np.ndarray] = None
    label: str = ""

    def __call__(self, v):
        return self.apply(v)


def linear_operator_a(setting: GalerkinSetting, matrix, alpha: float | None = None,
                      beta: float = 0.0, label: str = "linear") -> OperatorA:
    """Wrap a matrix; constants default to the sharp values for this setting.

    ``growth_b`` is the operator norm V -> V*; ``alpha`` defaults to the
    smallest generalized eigenvalue of the symmetric part against ``gram_v``.
    """
    m = _as_matrix(matrix, "A", (setting.dim_v, setting.dim_v)).copy()
    m.setflags(write=False)
    gv = setting.gram_v
    gb = sla.eigh(m.T @ setting.riesz(m), gv, eigvals_only=True)
    growth_b = math.sqrt(max(float(gb[-1]), 0.0)) * (1 + 1e-12) + 1e-300
    if alpha is None:
        sym = 0.5 * (m + m.T) + beta * setting.gram_h
        alpha = float(sla.eigh(sym, gv, eigvals_only=True)[0]) * (1 - 1e-12)
    return OperatorA(lambda v: m @ np.asarray(v, dtype=float), 0.0, growth_b, alpha, beta,
                     lambda v: m, m, label)


def with_cubic_damping(setting: GalerkinSetting, base: OperatorA, gamma: float,
                       radius: float = 10.0) -> OperatorA:
    """Extension: ``A(v) = base(v) + gamma * gram_h @ v**3`` (componentwise cube).

    Monotone for ``gamma >= 0`` when ``gram_h`` is diagonal; the declared
    linear growth only holds on the ball ``||v|| <= radius``.
    """
    gh = setting.gram_h

    def apply(v):
        v = np.asarray(v, dtype=float)
        return base.apply(v) + gamma * (gh @ v ** 3)

    def jacobian(v):
        v = np.asarray(v, dtype=float)
        jb = base.jacobian(v) if base.jacobian is not None else base.matrix
        return jb + gamma * gh * (3.0 * v ** 2)[None, :]

    # |v_k| <= ||v|| / sqrt(lambda_min(gram_v)); bound the cubic term on the ball
    lam_min = float(np.linalg.eigvalsh(setting.gram_v)[0])
    vmax = radius / math.sqrt(lam_min)
    extra = gamma * vmax ** 2 * math.sqrt(float(np.linalg.eigvalsh(gh @ setting.riesz(gh))[-1]))
    return OperatorA(apply, base.growth_a, base.growth_b + extra, base.coercive_alpha,
                     base.coercive_beta, jacobian, None, base.label + "+cubic (extension)")


@dataclass(frozen=True, eq=False)
class OperatorB:
    """Linear elasticity-type operator V -> V*."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix, "B").copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __call__(self, v):
        return self.matrix @ np.asarray(v, dtype=float)


# -- hypothesis validation --------------------------------------------------------


@dataclass
class CheckRecord:
    name: str
    margin: float
    samples: int
    witness: Optional[np.ndarray] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.margin) and self.margin >= MARGIN_TOL)


@dataclass
class HypothesisReport:
    records: list
    declared: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self):
        return [r for r in self.records if not r.passed]

    def __getitem__(self, name):
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def format(self) -> str:
        lines = []
        for r in self.records:
            flag = "ok  " if r.passed else "FAIL"
            lines.append(f"{flag} {r.name:<28} margin={r.margin:+.3e} samples={r.samples} {r.note}".rstrip())
        for k, v in self.declared.items():
            lines.append(f"note {k}: {v}")
        return "\n".join(lines)


def _sample_vectors(rng, setting, n):
    out = [np.zeros(setting.dim_v)]
    for _ in range(n):
        v = rng.standard_normal(setting.dim_v)
        nv = setting.norm_v(v)
        if nv > 0:
            v = v / nv * rng.uniform(0.1, 10.0)
        out.append(v)
    return out


def _worst(records_name, values, witnesses, samples, note=""):
    idx = int(np.argmin(values))
    return CheckRecord(records_name, float(values[idx]), samples, witnesses[idx], note)


def validate_hypotheses(setting: GalerkinSetting, A: OperatorA, B: OperatorB, j: Superpotential,
                        samples: int = 64, seed: int = 0) -> HypothesisReport:
    """Sample the inequalities of the standing hypotheses and report worst margins.

    Gram matrices are re-checked for positive definiteness (raises
    :class:`SetupError`).  Pseudomonotonicity of ``A`` is recorded as declared.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    for name in ("gram_v", "gram_h", "gram_u"):
        _check_spd(getattr(setting, name), name)
    rng = np.random.default_rng(seed)
    vs = _sample_vectors(rng, setting, samples)
    records = []

    growth = [A.growth_a + A.growth_b * setting.norm_v(v) - dual_norm(setting, A(v)) for v in vs]
    records.append(_worst("A.growth", growth, vs, len(vs)))
    coerc = []
    for v in vs:
        av = float(np.asarray(A(v)) @ v)
        coerc.append(av - A.coercive_alpha * setting.norm_v(v) ** 2 + A.coercive_beta * setting.norm_h(v) ** 2)
    records.append(_worst("A.coercivity", coerc, vs, len(vs)))

    bm = B.matrix
    if bm.shape != (setting.dim_v, setting.dim_v):
        raise SetupError(f"B has shape {bm.shape}, expected {(setting.dim_v, setting.dim_v)}")
    asym = float(np.abs(bm - bm.T).max()) if bm.size else 0.0
    records.append(CheckRecord("B.symmetric", 1e-12 * max(1.0, float(np.abs(bm).max())) - asym,
                               1, None, f"max|B-B^T|={asym:.1e}"))
    psd = [float(v @ bm @ v) for v in vs]
    records.append(_worst("B.positive", psd, vs, len(vs)))

    zs = [setting.trace @ v for v in vs]
    if j.laws is not None:
        for law_idx, law in enumerate(j.laws):
            for loc, _, _ in law.kinks:
                z = np.zeros(setting.dim_u)
                z[law_idx] = loc
                zs.append(z)
    gm, gw = [], []
    for z in zs:
        box = j.subdiff(z)
        worst = max(setting.norm_ustar(x) for x in box.extreme_points())
        gm.append(j.growth_d * (1.0 + setting.norm_u(z)) - worst)
        gw.append(z)
    records.append(_worst("j.growth", gm, gw, len(zs)))

    ladder = [10.0 ** -k for k in range(1, 9)]
    conv, cw = [], []
    for z in zs:
        box = j.subdiff(z)
        dists = [box.distance(j.smooth_grad(z, e)) for e in ladder]
        conv.append(min(1e-6 - dists[-1], dists[0] - dists[-1] + 1e-15))
        cw.append(z)
    records.append(_worst("j.smoothing_limit", conv, cw, len(zs)))

    if j.smooth_sampler is not None and not j.is_zero:
        pts = j.smooth_sampler(rng, max(4, min(samples, 32)))
        fd = []
        for z in pts:
            box = j.subdiff(z)
            width = float(np.max(box.hi - box.lo)) if isinstance(box, IntervalSet) else 0.0
            g = box.project(np.zeros_like(z))
            err = 0.0
            for k in range(len(z)):
                h = 1e-5 * (1.0 + abs(z[k]))
                e = np.zeros_like(z)
                e[k] = h
                d = (j.value(z + e) - j.value(z - e)) / (2 * h)
                err = max(err, abs(d - g[k]) / max(1.0, abs(g[k])))
            fd.append(1e-6 - err - width)
        records.append(_worst("j.smooth_gradient_fd", fd, pts, len(pts)))

    declared = {
        "A.pseudomonotone": "declared, not verified",
        "constants": f"a={A.growth_a:g} b={A.growth_b:g} alpha={A.coercive_alpha:g} "
                     f"beta={A.coercive_beta:g} d={j.growth_d:g}",
    }
    return HypothesisReport(records, declared)
