"""Per-step inclusion solves ``b in mass*i*i w + tau A w + c tau^2 B w + tau trace^T dj(trace w)``.

``mass_coeff = 1, b_coeff = 1`` is the first (implicit Euler) step operator,
``mass_coeff = 3/2, b_coeff = 2/3`` the double-step operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import OracleError, SolverError
from .spaces import MEMBERSHIP_TOL, GalerkinSetting, OperatorA, OperatorB, Superpotential, dual_norm

PENALTY = 1e6
STRATEGIES = ("smoothing-newton", "picard", "scalar-oracle")


@dataclass(frozen=True)
class SolveOptions:
    strategy: str = "smoothing-newton"
    epsilon_ladder: tuple = (1e-2, 1e-4, 1e-6, 1e-8)
    max_iters: int = 50
    tol_residual: float = 1e-8
    damping: float = 1.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        lad = tuple(float(e) for e in self.epsilon_ladder)
        if not lad or any(e <= 0 for e in lad):
            raise ValueError("epsilon_ladder must be non-empty and positive")
        if any(b >= a for a, b in zip(lad, lad[1:])):
            raise ValueError("epsilon_ladder must be strictly decreasing")
        if lad[-1] > 1e-8:
            raise ValueError("last epsilon_ladder entry must be <= 1e-8")
        object.__setattr__(self, "epsilon_ladder", lad)
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class StepOperator:
    setting: GalerkinSetting
    A: OperatorA
    B: OperatorB
    j: Superpotential
    tau: float
    mass_coeff: float = 1.0
    b_coeff: float = 1.0

    @classmethod
    def first(cls, setting, A, B, j, tau):
        return cls(setting, A, B, j, tau, 1.0, 1.0)

    @classmethod
    def double_step(cls, setting, A, B, j, tau):
        return cls(setting, A, B, j, tau, 1.5, 2.0 / 3.0)

    def single_valued(self, w):
        """``mass*i*i w + tau A w + tau B(b_coeff tau w)``."""
        w = np.asarray(w, dtype=float)
        return (self.mass_coeff * (self.setting.gram_h @ w) + self.tau * self.A(w)
                + self.b_coeff * self.tau ** 2 * self.B(w))

    def linear_part(self):
        """Matrix of the single-valued part when A is linear, else ``None``."""
        if self.A.matrix is None:
            return None
        return (self.mass_coeff * self.setting.gram_h + self.tau * self.A.matrix
                + self.b_coeff * self.tau ** 2 * self.B.matrix)

    def single_valued_jacobian(self, w):
        w = np.asarray(w, dtype=float)
        if self.A.matrix is not None:
            ja = self.A.matrix
        elif self.A.jacobian is not None:
            ja = self.A.jacobian(w)
        else:
            ja = _fd_jacobian(self.A.apply, w)
        return self.mass_coeff * self.setting.gram_h + self.tau * ja + self.b_coeff * self.tau ** 2 * self.B.matrix

    def trace_term(self, xi):
        return self.tau * (self.setting.trace.T @ np.asarray(xi, dtype=float))


def _fd_jacobian(fun, w):
    w = np.asarray(w, dtype=float)
    h = 1e-6 * (1.0 + np.linalg.norm(w))
    cols = []
    for k in range(w.size):
        e = np.zeros_like(w)
        e[k] = h
        cols.append((np.asarray(fun(w + e)) - np.asarray(fun(w - e))) / (2 * h))
    return np.array(cols).T


@dataclass
class SolveResult:
    w: np.ndarray
    xi: np.ndarray
    residual: float
    iterations: int
    strategy: str
    note: str = ""
    trace: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.w, self.xi, self.residual, self.iterations))


def equation_residual(op: StepOperator, w, xi, b) -> float:
    r = np.asarray(b, dtype=float) - op.single_valued(w) - op.trace_term(xi)
    return dual_norm(op.setting, r)


def residual_distance(op: StepOperator, w, xi, b) -> float:
    """Equation residual in V*, plus :data:`PENALTY` if ``xi`` is not a subgradient at ``trace w``."""
    res = equation_residual(op, w, xi, b)
    if not op.j.subdiff(op.setting.trace @ np.asarray(w, dtype=float)).contains(xi, MEMBERSHIP_TOL):
        res += PENALTY
    return res


def _inclusion_distance(op, w, xi, b):
    # equation residual with xi pulled back into the subdifferential
    xi_p = op.j.subdiff(op.setting.trace @ w).project(xi)
    return equation_residual(op, w, xi_p, b)


def _smoothed_residual(op, w, b, eps):
    xi = op.j.smooth_grad(op.setting.trace @ w, eps)
    return np.asarray(b, dtype=float) - op.single_valued(w) - op.trace_term(xi), xi


def _smoothed_jacobian(op, w, eps):
    tr = op.setting.trace
    z = tr @ w
    if op.j.smooth_grad_jac is not None:
        jz = op.j.smooth_grad_jac(z, eps)
    else:
        jz = _fd_jacobian(lambda zz: op.j.smooth_grad(zz, eps), z)
    return op.single_valued_jacobian(w) + op.tau * (tr.T @ jz @ tr)


def _newton(op, b, w, eps, opts, target):
    """Damped Newton with Armijo backtracking on the squared dual residual."""
    setting = op.setting
    r, xi = _smoothed_residual(op, w, b, eps)
    merit = dual_norm(setting, r)
    it = 0
    for it in range(1, opts.max_iters + 1):
        if merit <= target:
            return w, xi, merit, it - 1, True
        jac = _smoothed_jacobian(op, w, eps)
        dw = np.linalg.solve(jac, r)
        if not np.all(np.isfinite(dw)):
            raise np.linalg.LinAlgError("non-finite Newton direction")
        step = opts.damping
        for _ in range(30):
            w_try = w + step * dw
            r_try, xi_try = _smoothed_residual(op, w_try, b, eps)
            m_try = dual_norm(setting, r_try)
            if m_try ** 2 <= (1.0 - 1e-4 * step) * merit ** 2 or m_try <= target:
                break
            step *= 0.5
        w, r, xi, merit = w_try, r_try, xi_try, m_try
    return w, xi, merit, it, merit <= target


def _picard_matrix(op):
    # SPD preconditioner independent of any A Jacobian; exact for linear A
    lin = op.linear_part()
    if lin is not None:
        return lin
    s = op.setting
    scale = max(op.A.growth_b, op.A.coercive_alpha, 0.0)
    return op.mass_coeff * s.gram_h + op.tau * scale * s.gram_v + op.b_coeff * op.tau ** 2 * op.B.matrix


def _picard(op, b, w, eps, opts, target):
    """Preconditioned fixed point ``w <- w + damping K^{-1} r(w)`` with a frozen SPD ``K``."""
    k = _picard_matrix(op)
    it = 0
    r, xi = _smoothed_residual(op, w, b, eps)
    merit = dual_norm(op.setting, r)
    for it in range(1, 20 * opts.max_iters + 1):
        if merit <= target:
            return w, xi, merit, it - 1, True
        w = w + opts.damping * np.linalg.solve(k, r)
        r, xi = _smoothed_residual(op, w, b, eps)
        merit = dual_norm(op.setting, r)
    return w, xi, merit, it, merit <= target


def _active_set_polish(op, b, w, xi, radius, opts):
    """Certify a root on the exact (unsmoothed) inclusion for separable j.

    Components whose trace value lies within ``radius`` of a kink are pinned
    to it, their subgradient becoming an unknown; the rest use the smooth
    derivative.  A pinned multiplier outside the kink interval is released
    and the system re-solved.
    """
    laws = op.j.laws
    if laws is None:
        return None
    tr = op.setting.trace
    z = tr @ w
    pinned = {}
    for k, law in enumerate(laws):
        for loc, lo, hi in law.kinks:
            if abs(z[k] - loc) <= radius:
                pinned[k] = (loc, min(lo, hi), max(lo, hi))
    for _ in range(len(laws) + 1):
        sol = _solve_pinned(op, b, w, pinned, laws, opts)
        if sol is None:
            return None
        w_new, xi_new = sol
        bad = [k for k, (_, lo, hi) in pinned.items()
               if not (lo - MEMBERSHIP_TOL <= xi_new[k] <= hi + MEMBERSHIP_TOL)]
        if not bad:
            return w_new, xi_new
        for k in bad:
            pinned.pop(k)
    return None


def _solve_pinned(op, b, w, pinned, laws, opts):
    tr = op.setting.trace
    n, m = op.setting.dim_v, len(laws)
    idx = sorted(pinned)
    p = len(idx)
    free = [k for k in range(m) if k not in pinned]
    lam = np.array([0.5 * (pinned[k][1] + pinned[k][2]) for k in idx])
    w = np.array(w, dtype=float)

    def unpack(wv, lv):
        z = tr @ wv
        xi = np.array([laws[k].derivative(float(z[k])) if k in free else 0.0 for k in range(m)])
        for i, k in enumerate(idx):
            xi[k] = lv[i]
        return xi

    def system(wv, lv):
        xi = unpack(wv, lv)
        r = np.asarray(b, dtype=float) - op.single_valued(wv) - op.trace_term(xi)
        c = np.array([tr[k] @ wv - pinned[k][0] for k in idx])
        return np.concatenate([r, c]), xi

    res, xi = system(w, lam)
    scale = 1.0 + float(np.abs(b).max()) if np.size(b) else 1.0
    for _ in range(opts.max_iters):
        if np.abs(res).max() <= 1e-15 * scale:
            break
        z = tr @ w
        jac = np.zeros((n + p, n + p))
        curv = np.zeros(m)
        for k in free:
            curv[k] = laws[k].curvature(float(z[k]))
        jac[:n, :n] = op.single_valued_jacobian(w) + op.tau * (tr.T @ np.diag(curv) @ tr)
        for i, k in enumerate(idx):
            jac[:n, n + i] = op.tau * tr[k]
            jac[n + i, :n] = tr[k]
        rhs = np.concatenate([res[:n], -res[n:]])
        try:
            delta = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            return None
        w_new, lam_new = w + delta[:n], lam + delta[n:]
        res_new, xi_new = system(w_new, lam_new)
        if not np.all(np.isfinite(res_new)):
            return None
        w, lam, res, xi = w_new, lam_new, res_new, xi_new
        if np.linalg.norm(delta) <= 1e-15 * (1.0 + np.linalg.norm(w)):
            break
    if dual_norm(op.setting, res[:n]) > opts.tol_residual or (p and np.abs(res[n:]).max() > 1e-12):
        return None
    return w, xi


def solve_inclusion(op: StepOperator, b, warm_start=None, opts: Optional[SolveOptions] = None,
                    step: Optional[int] = None) -> SolveResult:
    """Find ``w`` and ``xi in dj(trace w)`` with ``b = single_valued(w) + tau trace^T xi``.

    Smoothing continuation over ``opts.epsilon_ladder`` (damped Newton, or
    Picard when requested or when the Jacobian is singular), followed by an
    exact active-set certification for separable potentials.
    """
    opts = opts or SolveOptions()
    setting = op.setting
    b = np.asarray(b, dtype=float)
    w = np.zeros(setting.dim_v) if warm_start is None else np.array(warm_start, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("warm start must be finite")

    if opts.strategy == "scalar-oracle":
        w, xi = scalar_oracle_solve(op, b)
        return SolveResult(w, xi, residual_distance(op, w, xi, b), 0, "scalar-oracle")

    lin = op.linear_part()
    if op.j.is_zero and lin is not None:
        w = np.linalg.solve(lin, b)
        xi = np.zeros(setting.dim_u)
        return SolveResult(w, xi, residual_distance(op, w, xi, b), 1, "linear")

    strategy = opts.strategy
    note = ""
    total = 0
    trace = []
    best = (w, op.j.smooth_grad(setting.trace @ w, opts.epsilon_ladder[0]), np.inf)
    converged = False
    for eps in opts.epsilon_ladder:
        target = 0.1 * opts.tol_residual
        try:
            if strategy == "picard":
                w, xi, merit, its, converged = _picard(op, b, w, eps, opts, target)
            else:
                w, xi, merit, its, converged = _newton(op, b, w, eps, opts, target)
        except np.linalg.LinAlgError:
            strategy = "picard"
            note = "singular Jacobian: fell back to picard"
            w, xi, merit, its, converged = _picard(op, b, w, eps, opts, target)
        total += its
        incl = _inclusion_distance(op, w, xi, b)
        trace.append((eps, merit, incl))
        if incl < best[2]:
            best = (w.copy(), op.j.subdiff(setting.trace @ w).project(xi), incl)

    eps_min = opts.epsilon_ladder[-1]
    polished = _active_set_polish(op, b, w, xi, max(4.0 * eps_min, 1e-10), opts)
    if polished is None:
        polished = _active_set_polish(op, b, w, xi, max(1e3 * eps_min, 1e-6), opts)
    if polished is not None:
        w_c, xi_c = polished
    else:
        w_c, xi_c = w, xi
    res = residual_distance(op, w_c, xi_c, b)
    trace.append((0.0, res, res))
    if res <= opts.tol_residual:
        return SolveResult(w_c, xi_c, res, total, strategy, note, trace)
    if best[2] < res:
        w_c, xi_c, res = best
    raise SolverError(
        f"inclusion solve did not converge (residual {res:.3e} > {opts.tol_residual:.1e}"
        f"{', smallest-eps Newton stalled' if not converged else ''})",
        step=step, best_w=w_c, best_xi=xi_c, best_residual=res,
    )


# -- brute-force scalar oracle ------------------------------------------------


def _bisect(fun, lo, hi, flo, fhi):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo if abs(flo) <= abs(fhi) else hi


def oracle_radius(op: StepOperator, b) -> float:
    """A-priori bound on scalar roots from the coercivity constants."""
    s = op.setting
    gh, gv, tr = float(s.gram_h[0, 0]), float(s.gram_v[0, 0]), float(s.trace[0, 0])
    bmat = float(op.B.matrix[0, 0])
    d = op.j.growth_d * math.sqrt(float(s.gram_u[0, 0]))
    kappa = (op.mass_coeff * gh + op.tau * (op.A.coercive_alpha * gv - op.A.coercive_beta * gh)
             + op.b_coeff * op.tau ** 2 * bmat - op.tau * d * tr * tr)
    ax = op.tau * op.A.growth_a / math.sqrt(gv) if gv > 0 else 0.0
    if kappa <= 0:
        return 1e6
    return 2.0 * (abs(float(np.ravel(b)[0])) + op.tau * d * abs(tr) + ax) / kappa + 1.0


def scalar_oracle_solve(op: StepOperator, b):
    """Enumerate smooth branches and kinks of a scalar inclusion; bisection per branch.

    Returns the first certified root (branches and kinks scanned left to
    right in the trace variable).
    """
    s = op.setting
    if s.dim_v != 1 or s.dim_u != 1:
        raise ValueError("scalar oracle requires dim_v = dim_u = 1")
    if op.j.laws is None:
        raise ValueError("scalar oracle requires a separable superpotential with declared kinks")
    law = op.j.laws[0]
    bval = float(np.ravel(b)[0])
    tr = float(s.trace[0, 0])
    big = oracle_radius(op, b)

    def single(w):
        return float(op.single_valued(np.array([w]))[0])

    def certify(w, xi):
        r = bval - single(w) - op.tau * tr * xi
        return abs(r) / math.sqrt(float(s.gram_v[0, 0])) <= 1e-12 * max(1.0, abs(bval))

    if tr == 0.0:
        # trace vanishes: j plays no role
        fun = lambda w: bval - single(w)
        flo, fhi = fun(-big), fun(big)
        if flo * fhi > 0:
            raise OracleError("no sign change for the trace-free equation")
        w = _bisect(fun, -big, big, flo, fhi)
        return np.array([w]), np.array([law.derivative(0.0)])

    kinks = sorted(law.kinks, key=lambda k: k[0])
    # trace-variable breakpoints; branch i lies between consecutive kinks
    zmax = abs(tr) * big
    cuts = [-zmax] + [k[0] for k in kinks if -zmax < k[0] < zmax] + [zmax]
    kinks_in = [k for k in kinks if -zmax < k[0] < zmax]
    candidates = []
    for i in range(len(cuts) - 1):
        za, zb = cuts[i], cuts[i + 1]
        ga = kinks_in[i - 1][2] if i > 0 else law.derivative(za)
        gb = kinks_in[i][1] if i < len(kinks_in) else law.derivative(zb)

        def fun(z, za=za, zb=zb, ga=ga, gb=gb):
            if z == za:
                g = ga
            elif z == zb:
                g = gb
            else:
                g = law.derivative(z)
            return bval - single(z / tr) - op.tau * tr * g

        fa, fb = fun(za), fun(zb)
        if fa == 0.0:
            candidates.append((za, ga))
        elif fb == 0.0:
            candidates.append((zb, gb))
        elif fa * fb < 0:
            z = _bisect(fun, za, zb, fa, fb)
            candidates.append((z, ga if z == za else gb if z == zb else law.derivative(z)))
        if i < len(kinks_in):
            loc, left, right = kinks_in[i]
            w = loc / tr
            xi = (bval - single(w)) / (op.tau * tr)
            if min(left, right) - MEMBERSHIP_TOL <= xi <= max(left, right) + MEMBERSHIP_TOL:
                candidates.append((loc, float(np.clip(xi, min(left, right), max(left, right)))))
    for z, xi in candidates:
        w = z / tr
        if certify(w, xi):
            return np.array([w]), np.array([xi])
    # bisection endpoints may sit one ulp off; accept the best candidate at 1e-12 scaled
    if candidates:
        z, xi = min(candidates, key=lambda c: abs(bval - single(c[0] / tr) - op.tau * tr * c[1]))
        w = z / tr
        r = abs(bval - single(w) - op.tau * tr * xi)
        if r <= 1e-10 * max(1.0, abs(bval)):
            return np.array([w]), np.array([xi])
    raise OracleError(f"no certified root of the scalar inclusion for b={bval:g}")
