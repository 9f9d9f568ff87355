"""Double-step Rothe scheme: an implicit Euler first step, then double-step marches."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PreconditionError, SolverError
from .inclusion import SolveOptions, StepOperator, solve_inclusion
from .spaces import MEMBERSHIP_TOL, GalerkinSetting, OperatorB
from .timegrid import InitialData, TimeGrid, average_loads, select_initial_data


def double_step_derivative(x_n, x_nm1, x_nm2, tau: float):
    """``(3/2 x_n - 2 x_{n-1} + 1/2 x_{n-2}) / tau``; exact on quadratics."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    x_n, x_nm1, x_nm2 = (np.asarray(x, dtype=float) for x in (x_n, x_nm1, x_nm2))
    if not (x_n.shape == x_nm1.shape == x_nm2.shape):
        raise ValueError(f"mismatched shapes {x_n.shape}, {x_nm1.shape}, {x_nm2.shape}")
    return (1.5 * x_n - 2.0 * x_nm1 + 0.5 * x_nm2) / tau


def assemble_first_rhs(setting: GalerkinSetting, B: OperatorB, data: InitialData, f1, tau: float):
    return tau * np.asarray(f1, dtype=float) + setting.gram_h @ data.w0_tau - tau * B(data.u0_tau)


def assemble_step_rhs(setting: GalerkinSetting, B: OperatorB, u, w, n: int, fn, tau: float):
    """Right-hand side of the double-step inclusion at step ``n >= 2``.

    ``u`` and ``w`` are node histories indexable at ``n-1`` and ``n-2``.
    """
    if n < 2:
        raise ValueError("double-step right-hand side needs n >= 2")
    gh = setting.gram_h
    return (tau * np.asarray(fn, dtype=float) + 2.0 * (gh @ w[n - 1]) - 0.5 * (gh @ w[n - 2])
            - tau * B(4.0 / 3.0 * u[n - 1] - 1.0 / 3.0 * u[n - 2]))


def coercivity_threshold(setting: GalerkinSetting, alpha: float, beta: float, d: float):
    """Step-size bound below which both step operators are coercive.

    With ``eps = alpha / (2 (1/2 + d))`` the V-norm coefficient is
    ``tau alpha / 2``; the H-norm coefficient ``1 - tau (beta + (1/2 + d) c(eps))``
    is positive for ``tau < tau0``, where ``c(eps)`` is the sharp trace
    embedding constant of the setting.  Returns ``(tau0, eps, c_eps)``.
    """
    if alpha <= 0:
        return 0.0, float("nan"), float("nan")
    eps = alpha / (2.0 * (0.5 + d))
    c_eps = setting.trace_embedding_constant(eps)
    denom = beta + (0.5 + d) * c_eps
    tau0 = math.inf if denom <= 0 else 1.0 / denom
    return tau0, eps, c_eps


@dataclass(eq=False)
class RotheTrajectory:
    grid: TimeGrid
    u: np.ndarray
    w: np.ndarray
    xi: np.ndarray
    loads: np.ndarray
    residuals: np.ndarray
    initial: Optional[InitialData] = None
    tau0: float = math.inf
    notes: list = field(default_factory=list)
    label: str = ""
    setting: Optional[GalerkinSetting] = None

    def __post_init__(self):
        for name in ("u", "w", "xi", "loads", "residuals"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            setattr(self, name, arr)

    @property
    def N(self) -> int:
        return self.grid.steps_N

    @property
    def tau(self) -> float:
        return self.grid.tau

    def scaled(self, factor: float) -> "RotheTrajectory":
        return RotheTrajectory(self.grid, factor * self.u, factor * self.w, factor * self.xi,
                               factor * self.loads, self.residuals, self.initial, self.tau0,
                               list(self.notes), self.label, self.setting)


def run_scheme(problem, grid: TimeGrid, opts: Optional[SolveOptions] = None, cap_C: Optional[float] = None,
               check_hypotheses: bool = True, hypothesis_samples: int = 16, seed: int = 0) -> RotheTrajectory:
    """March the double-step Rothe problem over ``grid``.

    Raises :class:`PreconditionError` if the sampled hypotheses fail or the
    step is not below the coercivity threshold, and :class:`SolverError`
    (carrying the step index) if a step inclusion cannot be solved.
    """
    opts = opts or SolveOptions()
    s, A, B, j = problem.setting, problem.A, problem.B, problem.j
    if check_hypotheses:
        rep = problem.hypotheses(hypothesis_samples, seed)
        if not rep.passed:
            names = ", ".join(r.name for r in rep.failures)
            raise PreconditionError(f"hypothesis checks failed: {names}")
    tau = grid.tau
    tau0, eps, c_eps = coercivity_threshold(s, A.coercive_alpha, A.coercive_beta, j.growth_d)
    if not tau < tau0:
        raise PreconditionError(
            f"tau={tau:.4g} is not below the coercivity threshold tau0={tau0:.4g}; "
            "the step problems are only guaranteed solvable for small tau")
    data = select_initial_data(s, problem.u0, problem.w0, grid, problem.cap_C if cap_C is None else cap_C)
    notes = [f"tau0={tau0:.6g} (eps={eps:.6g}, trace constant={c_eps:.6g})"]
    if data.rescaled:
        notes.append("initial velocity rescaled onto the C/sqrt(tau) ball")
    loads = average_loads(problem.load, grid)
    N = grid.steps_N
    u = np.zeros((N + 1, s.dim_v))
    w = np.zeros((N + 1, s.dim_v))
    xi = np.zeros((N, s.dim_u))
    res = np.zeros(N)
    u[0], w[0] = data.u0_tau, data.w0_tau

    op1 = StepOperator.first(s, A, B, j, tau)
    op2 = StepOperator.double_step(s, A, B, j, tau)
    for n in range(1, N + 1):
        if n == 1:
            op, rhs = op1, assemble_first_rhs(s, B, data, loads[0], tau)
        else:
            op, rhs = op2, assemble_step_rhs(s, B, u, w, n, loads[n - 1], tau)
        try:
            sol = solve_inclusion(op, rhs, warm_start=w[n - 1], opts=opts, step=n)
        except SolverError as exc:
            exc.step = n
            raise SolverError(f"step {n}: {exc}", n, exc.best_w, exc.best_xi, exc.best_residual) from exc
        if sol.note:
            notes.append(f"step {n}: {sol.note}")
        if not j.subdiff(s.trace @ sol.w).contains(sol.xi, MEMBERSHIP_TOL):
            raise SolverError(f"step {n}: subgradient membership failed", n, sol.w, sol.xi, sol.residual)
        w[n], xi[n - 1], res[n - 1] = sol.w, sol.xi, sol.residual
        if n == 1:
            u[1] = tau * w[1] + u[0]
        else:
            u[n] = (2.0 / 3.0) * (tau * w[n] + 2.0 * u[n - 1] - 0.5 * u[n - 2])
    return RotheTrajectory(grid, u, w, xi, loads, res, data, tau0, notes, problem.label, s)


def geometric_displacements(u0, u1, w, tau: float):
    """Displacements from the closed geometric-series form of the u-recursion.

    ``u^n = sum_{k=2}^n 3^{-(n-k)} S_k + (3 - 3^{1-n})/2 u^1 - (1 - 3^{1-n})/2 u^0``
    with ``S_k = (2/3) tau sum_{i=2}^k w^i``.
    """
    w = np.asarray(w, dtype=float)
    N = w.shape[0] - 1
    u0, u1 = np.asarray(u0, dtype=float), np.asarray(u1, dtype=float)
    S = np.zeros_like(w)
    S[2:] = (2.0 / 3.0) * tau * np.cumsum(w[2:], axis=0)
    out = np.zeros_like(w)
    out[0], out[1] = u0, u1
    for n in range(2, N + 1):
        acc = np.zeros_like(u0)
        for k in range(2, n + 1):
            acc = acc + (1.0 / 3.0) ** (n - k) * S[k]
        q = (1.0 / 3.0) ** (n - 1)
        out[n] = acc + 0.5 * (3.0 - q) * u1 - 0.5 * (1.0 - q) * u0
    return out


def telescoped_sum(u, n: int):
    """Left side ``u0/2 - 3u1/2 - u^{n-1}/2 + 3u^n/2`` of the telescoped recursion."""
    return 0.5 * u[0] - 1.5 * u[1] - 0.5 * u[n - 1] + 1.5 * u[n]
