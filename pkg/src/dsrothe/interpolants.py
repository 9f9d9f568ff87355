"""Rothe interpolants of a trajectory and their norms.

Piecewise constants take the node value ``n`` on ``I_n = ((n-1) tau, n tau]``.
``w_lin`` is the piecewise-linear velocity interpolant built from the
double-step slopes, ``u_lin`` the integral of the piecewise-constant
velocity.  Every integrand is a piecewise polynomial of degree <= 2, so all
norms below are exact sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spaces import dual_norm
from .stepper import RotheTrajectory

FUNCTIONS = ("u_bar", "w_bar", "xi_bar", "f_bar", "u_lin", "w_lin")
NORMS = ("L2V", "L2Vstar", "L2H", "LinfH", "LinfV", "L2Ustar")

# codomain of each function: "V" functions admit V, H and V* (through i*i) norms
_COMPATIBLE = {
    "u_bar": {"L2V", "L2Vstar", "L2H", "LinfH", "LinfV"},
    "w_bar": {"L2V", "L2Vstar", "L2H", "LinfH", "LinfV"},
    "u_lin": {"L2V", "L2Vstar", "L2H", "LinfH", "LinfV"},
    "w_lin": {"L2V", "L2Vstar", "L2H", "LinfH", "LinfV"},
    "f_bar": {"L2Vstar"},
    "xi_bar": {"L2Ustar"},
}


@dataclass(frozen=True, eq=False)
class RotheInterpolants:
    traj: RotheTrajectory

    @property
    def setting(self):
        return self.traj.setting

    def _interval(self, t):
        T, N, tau = self.traj.grid.horizon_T, self.traj.N, self.traj.tau
        if not (0.0 <= t <= T):
            raise ValueError(f"t={t} outside [0, {T}]")
        if t == 0.0:
            return 1
        return min(max(int(math.ceil(t / tau - 1e-12)), 1), N)

    def eval(self, which: str, t: float):
        tr = self.traj
        n = self._interval(t)
        tau = tr.tau
        tn = n * tau
        if which == "u_bar":
            return tr.u[n].copy()
        if which == "w_bar":
            return tr.w[n].copy()
        if which == "xi_bar":
            return tr.xi[n - 1].copy()
        if which == "f_bar":
            return tr.loads[n - 1].copy()
        if which == "w_lin":
            a, b = self._w_lin_coeffs(n)
            return a + b * (t - tn) / tau
        if which == "u_lin":
            return self._u_lin_start(n) + (t - (n - 1) * tau) * tr.w[n]
        raise ValueError(f"unknown function {which!r}; expected one of {FUNCTIONS}")

    def _w_lin_coeffs(self, n):
        w = self.traj.w
        if n == 1:
            return 1.5 * w[1] - 0.5 * w[0], w[1] - w[0]
        return 1.5 * w[n] - 0.5 * w[n - 1], 1.5 * w[n] - 2.0 * w[n - 1] + 0.5 * w[n - 2]

    def _u_lin_start(self, n):
        tr = self.traj
        return tr.u[0] + tr.tau * tr.w[1:n].sum(axis=0)

    def w_lin_limits(self, n: int):
        """One-sided limits of ``w_lin`` at node ``t_n`` (left, right)."""
        a, _ = self._w_lin_coeffs(n)
        left = a
        if n >= self.traj.N:
            return left, None
        a2, b2 = self._w_lin_coeffs(n + 1)
        return left, a2 - b2

    def endpoint_values(self, which: str):
        """Values of ``which`` at the left and right end of every ``I_n`` (rows n = 1..N)."""
        tr = self.traj
        N, tau = tr.N, tr.tau
        if which in ("u_bar", "w_bar"):
            v = (tr.u if which == "u_bar" else tr.w)[1:]
            return v, v
        if which == "xi_bar":
            return tr.xi, tr.xi
        if which == "f_bar":
            return tr.loads, tr.loads
        if which == "w_lin":
            left, right = [], []
            for n in range(1, N + 1):
                a, b = self._w_lin_coeffs(n)
                left.append(a - b)
                right.append(a)
            return np.array(left), np.array(right)
        if which == "u_lin":
            starts = tr.u[0] + tau * np.vstack([np.zeros_like(tr.w[0]), np.cumsum(tr.w[1:N], axis=0)])
            return starts, starts + tau * tr.w[1:]
        raise ValueError(f"unknown function {which!r}; expected one of {FUNCTIONS}")

    def _gram_and_kind(self, norm_kind):
        s = self.setting
        if norm_kind in ("L2V", "LinfV"):
            return s.gram_v
        if norm_kind in ("L2H", "LinfH"):
            return s.gram_h
        if norm_kind == "L2Vstar":
            # ||i*i v||_{V*}^2 = v^T G_h G_v^{-1} G_h v
            return s.gram_h @ s.riesz(s.gram_h)
        raise ValueError(norm_kind)

    def norm(self, which: str, norm_kind: str) -> float:
        if which not in FUNCTIONS:
            raise ValueError(f"unknown function {which!r}")
        if norm_kind not in NORMS:
            raise ValueError(f"unknown norm {norm_kind!r}")
        if norm_kind not in _COMPATIBLE[which]:
            raise ValueError(f"norm {norm_kind} is not defined for {which}")
        s = self.setting
        tau = self.traj.tau
        left, right = self.endpoint_values(which)
        if which == "f_bar":
            return math.sqrt(tau * sum(dual_norm(s, l) ** 2 for l in left))
        if which == "xi_bar":
            return math.sqrt(tau * sum(s.norm_ustar(x) ** 2 for x in left))
        g = self._gram_and_kind(norm_kind)
        return _piecewise_linear_norm(left, right, g, tau, norm_kind.startswith("Linf"))

    def bv2_upper_bound(self, which: str = "w_bar") -> float:
        """``T tau sum_n ||(w^n - w^{n-1}) / tau||_{V*}^2``, a bound on the squared BV^2(V*) seminorm."""
        if which != "w_bar":
            raise ValueError("the BV^2 bound is available for w_bar only")
        tr, s = self.traj, self.setting
        tau, T = tr.tau, tr.grid.horizon_T
        d = np.diff(tr.w, axis=0) / tau
        return T * tau * sum(dual_norm(s, s.gram_h @ dn) ** 2 for dn in d)

    def gaps(self):
        """``(||w_lin - w_bar||_{L2 V*}, ||u_lin - u_bar||_{L2 V})``, exact."""
        return interpolant_gaps(self)


def _piecewise_linear_norm(left, right, gram, tau, sup):
    left = np.atleast_2d(left)
    right = np.atleast_2d(right)
    ql = np.einsum("ij,jk,ik->i", left, gram, left)
    qr = np.einsum("ij,jk,ik->i", right, gram, right)
    if sup:
        # convex quadratic along each piece: maximum at an endpoint
        return math.sqrt(max(float(max(ql.max(), qr.max())), 0.0))
    qlr = np.einsum("ij,jk,ik->i", left, gram, right)
    return math.sqrt(max(float(tau / 3.0 * (ql + qlr + qr).sum()), 0.0))


def interpolant_gaps(interp: RotheInterpolants):
    s = interp.setting
    tau = interp.traj.tau
    wl, wr = interp.endpoint_values("w_lin")
    wb = interp.traj.w[1:]
    gstar = s.gram_h @ s.riesz(s.gram_h)
    gap_w = _piecewise_linear_norm(wl - wb, wr - wb, gstar, tau, False)
    ul, ur = interp.endpoint_values("u_lin")
    ub = interp.traj.u[1:]
    gap_u = _piecewise_linear_norm(ul - ub, ur - ub, s.gram_v, tau, False)
    return gap_w, gap_u


def exact_bv2_seminorm_sq(values, norm) -> float:
    """Squared BV^2 seminorm of a step function taking ``values[0], values[1], ...`` in order.

    The supremum over partitions reduces to a longest-path problem over
    increasing index chains from the first to the last value (O(n^2)).
    """
    vals = [np.asarray(v, dtype=float) for v in values]
    n = len(vals)
    best = np.full(n, -np.inf)
    best[0] = 0.0
    for j in range(1, n):
        best[j] = max(best[i] + norm(vals[j] - vals[i]) ** 2 for i in range(j))
    # intermediate partition points may stop anywhere; the last value is forced
    return float(best[-1])


def load_error_l2(interp: RotheInterpolants, load, order: int = 6) -> float:
    """``||f_bar - f||_{L2 V*}`` by composite Gauss-Legendre per step."""
    s = interp.setting
    tr = interp.traj
    x, wts = np.polynomial.legendre.leggauss(order)
    tau = tr.tau
    acc = 0.0
    for n in range(1, tr.N + 1):
        a = (n - 1) * tau
        for xk, wk in zip(x, wts):
            t = a + 0.5 * tau * (xk + 1.0)
            acc += 0.5 * tau * wk * dual_norm(s, tr.loads[n - 1] - load(t)) ** 2
    return math.sqrt(acc)
