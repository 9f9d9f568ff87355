"""Algebraic identities behind the energy estimates, a-priori quantities, sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .interpolants import RotheInterpolants
from .spaces import dual_norm
from .stepper import RotheTrajectory

# double-step weights (3/2, -2, 1/2); module-level so tests can mutate them
DS_WEIGHTS = (1.5, -2.0, 0.5)

APRIORI_NAMES = ("a1", "a2", "a3", "a4", "a5", "a6", "a7")
INCREMENT_CONSTANT = 9.0


def _inner(gram):
    if gram is None:
        return lambda x, y: float(np.dot(x, y))
    g = np.asarray(gram, dtype=float)
    return lambda x, y: float(x @ g @ y)


def identity_double_step_inner(a, b, c, gram=None):
    """``(3/2 a - 2b + c/2, a)`` against its expansion into squared norms."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    if not (a.shape == b.shape == c.shape):
        raise ValueError("vectors must have equal lengths")
    ip = _inner(gram)
    k0, k1, k2 = DS_WEIGHTS
    lhs = ip(k0 * a + k1 * b + k2 * c, a)
    sq = lambda x: ip(x, x)
    rhs = 0.25 * (sq(a) + sq(2 * a - b) - sq(b) - sq(2 * b - c) + sq(a - 2 * b + c))
    return lhs, rhs


def identity_second_difference(a, b, c, gram=None):
    """``(3/2 a - 2b + c/2, a - 2b + c) = |a-b|^2/2 + |a-2b+c|^2 - |b-c|^2/2``."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    if not (a.shape == b.shape == c.shape):
        raise ValueError("vectors must have equal lengths")
    ip = _inner(gram)
    k0, k1, k2 = DS_WEIGHTS
    lhs = ip(k0 * a + k1 * b + k2 * c, a - 2 * b + c)
    sq = lambda x: ip(x, x)
    rhs = 0.5 * sq(a - b) + sq(a - 2 * b + c) - 0.5 * sq(b - c)
    return lhs, rhs


def increment_inequality(deltas, norm: Optional[Callable] = None):
    """``(sum ||d_i||^2, ||d_1||^2 + sum_{i>=2} ||3/2 d_i - 1/2 d_{i-1}||^2)``.

    The first never exceeds :data:`INCREMENT_CONSTANT` times the second.
    """
    deltas = [np.atleast_1d(np.asarray(d, dtype=float)) for d in deltas]
    if not deltas:
        raise ValueError("need at least one increment")
    nrm = norm or (lambda x: float(np.linalg.norm(x)))
    lhs = sum(nrm(d) ** 2 for d in deltas)
    rhs = nrm(deltas[0]) ** 2 + sum(nrm(1.5 * deltas[i] - 0.5 * deltas[i - 1]) ** 2
                                    for i in range(1, len(deltas)))
    return lhs, rhs


def increment_inequality_steps(deltas, norm: Optional[Callable] = None):
    """Both sides of ``sum_{i<N} ||d_i||^2/2 + ||d_N||^2 <= 9/4 ||d_1||^2 + 2 sum ||3/2 d_i - d_{i-1}/2||^2``."""
    deltas = [np.atleast_1d(np.asarray(d, dtype=float)) for d in deltas]
    if not deltas:
        raise ValueError("need at least one increment")
    nrm = norm or (lambda x: float(np.linalg.norm(x)))
    lhs = 0.5 * sum(nrm(d) ** 2 for d in deltas[:-1]) + nrm(deltas[-1]) ** 2
    rhs = 2.25 * nrm(deltas[0]) ** 2 + 2.0 * sum(nrm(1.5 * deltas[i] - 0.5 * deltas[i - 1]) ** 2
                                                 for i in range(1, len(deltas)))
    return lhs, rhs


@dataclass
class BoundRecord:
    name: str
    value: float
    note: str = ""


@dataclass
class BoundReport:
    records: list
    constants_used: dict = field(default_factory=dict)
    suites: dict = field(default_factory=dict)

    def __getitem__(self, name):
        for r in self.records:
            if r.name == name:
                return r.value
        raise KeyError(name)

    def as_dict(self):
        return {r.name: r.value for r in self.records}

    def format(self) -> str:
        lines = [f"{r.name:<4} {r.value:.17g}  {r.note}".rstrip() for r in self.records]
        for k, v in self.constants_used.items():
            lines.append(f"# {k} = {v}")
        return "\n".join(lines)


def apriori_quantities(traj: RotheTrajectory) -> dict:
    s = traj.setting
    tau = traj.tau
    u, w, xi = traj.u, traj.w, traj.xi
    vstar_h = lambda v: dual_norm(s, s.gram_h @ v)
    out = {}
    out["a1"] = tau * sum(s.norm_v(wn) ** 2 for wn in w)
    out["a2"] = max(s.norm_h(wn) for wn in w)
    out["a3"] = tau * sum(s.norm_ustar(x) ** 2 for x in xi)
    out["a4"] = tau * vstar_h((w[1] - w[0]) / tau) ** 2
    out["a5"] = tau * sum(vstar_h((1.5 * w[n] - 2 * w[n - 1] + 0.5 * w[n - 2]) / tau) ** 2
                          for n in range(2, traj.N + 1))
    out["a6"] = sum(s.norm_h(w[n] - 2 * w[n - 1] + w[n - 2]) ** 2 for n in range(2, traj.N + 1))
    out["a7"] = max(s.norm_v(un) for un in u)
    return out


_NOTES = {
    "a1": "tau sum_{n=0}^N ||w^n||^2",
    "a2": "max_n |w^n|",
    "a3": "tau sum ||xi^n||_U*^2",
    "a4": "tau ||(w^1-w^0)/tau||_V*^2",
    "a5": "tau sum_{n>=2} ||double-step increment / tau||_V*^2",
    "a6": "sum_{n>=2} |w^n - 2w^{n-1} + w^{n-2}|^2",
    "a7": "max_n ||u^n||",
    "e1": "||w_lin||_L2(V)",
    "e2": "||w_bar||_L2(V)",
    "e3": "||w_bar||_Linf(H)",
    "e4": "||w_lin'||_L2(V*)",
    "e6": "||w_bar||_L2(V) + sqrt(BV^2(V*) bound)",
    "e7": "||w_lin||_Linf(H)",
    "e8": "||xi_bar||_L2(U*)",
    "e9": "||u_bar||_Linf(V)",
    "e10": "||u_lin||_Linf(V)",
}


def apriori_suite(traj: RotheTrajectory, interp: Optional[RotheInterpolants] = None) -> BoundReport:
    """Report (no pass/fail) of the discrete a-priori quantities and interpolant norms."""
    interp = interp or RotheInterpolants(traj)
    q = apriori_quantities(traj)
    e = {
        "e1": interp.norm("w_lin", "L2V"),
        "e2": interp.norm("w_bar", "L2V"),
        "e3": interp.norm("w_bar", "LinfH"),
        "e4": math.sqrt(q["a4"] + q["a5"]),
        "e6": interp.norm("w_bar", "L2V") + math.sqrt(interp.bv2_upper_bound("w_bar")),
        "e7": interp.norm("w_lin", "LinfH"),
        "e8": interp.norm("xi_bar", "L2Ustar"),
        "e9": interp.norm("u_bar", "LinfV"),
        "e10": interp.norm("u_lin", "LinfV"),
    }
    records = [BoundRecord(k, v, _NOTES[k]) for k, v in {**q, **e}.items()]
    return BoundReport(records, {"tau": traj.tau, "N": traj.N, "tau0": traj.tau0})


def first_increment_decay(trajectories) -> list:
    """``|w^1 - w^0|`` per refinement level, ordered as given."""
    trajectories = list(trajectories)
    if len(trajectories) < 3:
        raise ValueError("need at least 3 refinement levels")
    return [(tr.N, tr.tau, tr.setting.norm_h(tr.w[1] - tr.w[0])) for tr in trajectories]


def discrete_energy(traj: RotheTrajectory, B) -> np.ndarray:
    """``E_n = |w^n|^2/4 + |2w^n - w^{n-1}|^2/4 + <Bu^n,u^n>/4 + <B(2u^n-u^{n-1}), 2u^n-u^{n-1}>/4``, n >= 1."""
    s = traj.setting
    bm = B.matrix
    out = []
    for n in range(1, traj.N + 1):
        w2 = 2 * traj.w[n] - traj.w[n - 1]
        u2 = 2 * traj.u[n] - traj.u[n - 1]
        out.append(0.25 * (s.norm_h(traj.w[n]) ** 2 + s.norm_h(w2) ** 2
                           + traj.u[n] @ bm @ traj.u[n] + u2 @ bm @ u2))
    return np.array(out)


# -- randomized sweeps ----------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    instances: int
    witness: Optional[object] = None

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        w = "" if self.passed or self.witness is None else f" witness={self.witness}"
        return f"{flag} {self.name}: worst={self.worst:.3e} over {self.instances} instances{w}"


def _random_gram(rng, d):
    q = rng.standard_normal((d, d))
    return q @ q.T + d * np.eye(d)


def sweep_identity(fn, name, count=1000, seed=0, dims=range(1, 17), tol=1e-12):
    rng = np.random.default_rng(seed)
    dims = list(dims)
    worst, witness = 0.0, None
    for i in range(count):
        d = dims[i % len(dims)]
        a, b, c = rng.standard_normal((3, d))
        gram = _random_gram(rng, d) if i % 2 else None
        lhs, rhs = fn(a, b, c, gram)
        scale = 1.0 + abs(lhs)
        dev = abs(lhs - rhs) / scale
        if dev > worst:
            worst, witness = dev, (d, a.tolist(), b.tolist(), c.tolist(), lhs, rhs)
    return SuiteResult(name, worst <= tol, worst, count, witness)


def sweep_increment_inequality(count=1000, seed=0, max_len=20, dims=range(1, 17)):
    rng = np.random.default_rng(seed)
    dims = list(dims)
    worst_ratio, worst_inter, witness = 0.0, -np.inf, None
    ok = True
    for i in range(count):
        d = dims[i % len(dims)]
        n = int(rng.integers(1, max_len + 1))
        deltas = rng.standard_normal((n, d)) * rng.uniform(0.1, 10.0)
        if i % 3 == 0:
            # alternating sequences stress the 3/2 d_i - 1/2 d_{i-1} combination
            deltas = np.cumprod(np.full((n, d), 1.0 / 3.0), axis=0) * np.sign(rng.standard_normal(d))
        lhs, rhs = increment_inequality(deltas)
        ilhs, irhs = increment_inequality_steps(deltas)
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
        slack = ilhs - irhs
        if ratio > worst_ratio:
            worst_ratio = ratio
            if ratio > INCREMENT_CONSTANT:
                witness = deltas.tolist()
        worst_inter = max(worst_inter, slack / (1.0 + abs(irhs)))
        if lhs > INCREMENT_CONSTANT * rhs * (1 + 1e-12) or slack > 1e-12 * (1.0 + abs(irhs)):
            ok = False
            witness = witness or deltas.tolist()
    return SuiteResult("increment-ineq(c=9)", ok, worst_ratio, count, witness)


def sweep_oracle_equivalence(points=100, tau=0.1, seed=0):
    """Smoothing Newton against the brute-force oracle on the scalar |u| inclusion."""
    from .inclusion import SolveOptions, StepOperator, scalar_oracle_solve, solve_inclusion
    from .problems import abs_friction_scalar

    p = abs_friction_scalar()
    worst, witness = 0.0, None
    for mass in (1.0, 1.5):
        op = StepOperator(p.setting, p.A, p.B, p.j, tau, mass, 1.0 if mass == 1.0 else 2.0 / 3.0)
        for b in np.linspace(-2.0, 2.0, points):
            w_n = solve_inclusion(op, [b], opts=SolveOptions()).w
            w_o, _ = scalar_oracle_solve(op, [b])
            dev = float(abs(w_n[0] - w_o[0]))
            if dev > worst:
                worst, witness = dev, (mass, float(b))
    return SuiteResult("oracle-vs-newton", worst <= 1e-8, worst, 2 * points, witness)


def run_validation(seed: int = 0, sweep: int = 1000):
    return [
        sweep_identity(identity_double_step_inner, "ds-inner", sweep, seed),
        sweep_identity(identity_second_difference, "second-diff", sweep, seed + 1),
        sweep_increment_inequality(sweep, seed + 2),
        sweep_oracle_equivalence(),
    ]
