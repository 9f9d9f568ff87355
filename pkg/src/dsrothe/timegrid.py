"""Uniform time grid, averaged discrete loads and initial data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .spaces import GalerkinSetting


@dataclass(frozen=True)
class TimeGrid:
    horizon_T: float
    steps_N: int

    def __post_init__(self):
        if not (self.horizon_T > 0 and math.isfinite(self.horizon_T)):
            raise ValueError(f"horizon must be positive, got {self.horizon_T}")
        if int(self.steps_N) != self.steps_N or self.steps_N < 2:
            raise ValueError(f"steps_N must be an integer >= 2, got {self.steps_N}")

    @property
    def tau(self) -> float:
        return self.horizon_T / self.steps_N

    @property
    def nodes(self) -> np.ndarray:
        # n * tau, with the last node pinned to T
        t = np.arange(self.steps_N + 1) * self.tau
        t[-1] = self.horizon_T
        return t

    def node(self, n: int) -> float:
        return self.horizon_T if n == self.steps_N else n * self.tau


@lru_cache(maxsize=32)
def _gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True, eq=False)
class LoadSpec:
    """Load ``f: [0, T] -> V*`` and the Gauss-Legendre order per subinterval."""

    f: Callable[[float], np.ndarray]
    quadrature_order: int = 4
    label: str = ""

    def __post_init__(self):
        if self.quadrature_order < 1:
            raise ValueError("quadrature_order must be positive")

    def __call__(self, t):
        return np.asarray(self.f(t), dtype=float)

    def integrate(self, a: float, b: float) -> np.ndarray:
        """Gauss-Legendre approximation of the integral of f over [a, b]."""
        x, w = _gauss_legendre(self.quadrature_order)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return half * sum(wk * self(mid + half * xk) for xk, wk in zip(x, w))


def zero_load(dim_v: int) -> LoadSpec:
    z = np.zeros(dim_v)
    return LoadSpec(lambda t: z, 1, "zero")


def constant_load(c) -> LoadSpec:
    c = np.atleast_1d(np.asarray(c, dtype=float)).copy()
    return LoadSpec(lambda t: c, 1, "constant")


def polynomial_load(coefficients, quadrature_order: int = 4) -> LoadSpec:
    """``f(t) = sum_k coefficients[k] * t**k``; rows are per-power V*-vectors."""
    c = np.atleast_2d(np.asarray(coefficients, dtype=float))

    def f(t):
        return sum(ck * t ** k for k, ck in enumerate(c))

    return LoadSpec(f, quadrature_order, "polynomial")


def table_load(times, values, quadrature_order: int = 4) -> LoadSpec:
    """Piecewise-linear interpolation of a dense table (rows of ``values``)."""
    times = np.asarray(times, dtype=float)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] != times.shape[0]:
        values = values.T
    if np.any(np.diff(times) <= 0):
        raise ValueError("table times must be strictly increasing")

    def f(t):
        return np.array([np.interp(t, times, values[:, k]) for k in range(values.shape[1])])

    return LoadSpec(f, quadrature_order, "table")


def average_load(spec: LoadSpec, grid: TimeGrid, n: int) -> np.ndarray:
    """Discrete load at step n from the double-step derivative of the primitive.

    ``n = 1`` gives the plain average over the first step; for ``n >= 2`` the
    weights are 3/(2 tau) on the last subinterval and -1/(2 tau) on the one
    before.
    """
    if not (1 <= n <= grid.steps_N) or int(n) != n:
        raise ValueError(f"step index n={n} outside 1..{grid.steps_N}")
    tau = grid.tau
    last = spec.integrate(grid.node(n - 1), grid.node(n))
    if n == 1:
        return last / tau
    prev = spec.integrate(grid.node(n - 2), grid.node(n - 1))
    return 1.5 / tau * last - 0.5 / tau * prev


def average_loads(spec: LoadSpec, grid: TimeGrid) -> np.ndarray:
    """All discrete loads ``f^1..f^N`` as rows; each subinterval integrated once."""
    tau = grid.tau
    ints = [spec.integrate(grid.node(k - 1), grid.node(k)) for k in range(1, grid.steps_N + 1)]
    out = [ints[0] / tau]
    for n in range(2, grid.steps_N + 1):
        out.append(1.5 / tau * ints[n - 1] - 0.5 / tau * ints[n - 2])
    return np.array(out)


@dataclass(frozen=True, eq=False)
class InitialData:
    u0_tau: np.ndarray
    w0_tau: np.ndarray
    u0_target: np.ndarray
    w0_target_h: np.ndarray
    scale_cap_C: float
    rescaled: bool = False


def select_initial_data(setting: GalerkinSetting, u0, w0, grid: TimeGrid, cap_C: float) -> InitialData:
    """Discrete initial data with ``||w0_tau|| <= cap_C / sqrt(tau)``.

    The displacement is taken as is; the velocity is radially rescaled onto
    the V-ball when it exceeds the cap.
    """
    if not cap_C > 0:
        raise ValueError("cap_C must be positive")
    u0 = np.asarray(u0, dtype=float).copy()
    w0 = np.asarray(w0, dtype=float).copy()
    radius = cap_C / math.sqrt(grid.tau)
    nw = setting.norm_v(w0)
    if nw <= radius:
        return InitialData(u0, w0, u0, w0, cap_C)
    return InitialData(u0, w0 * (radius / nw), u0, w0, cap_C, rescaled=True)
