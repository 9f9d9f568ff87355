"""Brute-force trapezoid oracle for the interpolant gaps, built from the definitions."""

import numpy as np

_trapz = getattr(np, "trapezoid", None) or np.trapz


def gaps_by_trapezoid(w, u, tau, gram_v, gram_h, points=10_000):
    w, u = np.atleast_2d(np.asarray(w, float)), np.atleast_2d(np.asarray(u, float))
    N = len(w) - 1
    gstar = gram_h @ np.linalg.solve(gram_v, gram_h)
    per = max(points // N, 2)
    gw = gu = 0.0
    for n in range(1, N + 1):
        t0 = (n - 1) * tau
        s = np.linspace(t0, t0 + tau, per)
        if n == 1:
            wl = [0.5 * (w[1] + w[0]) + (w[1] - w[0]) * (t - t0) / tau for t in s]
        else:
            wl = [1.5 * w[n] - 0.5 * w[n - 1]
                  + (1.5 * w[n] - 2 * w[n - 1] + 0.5 * w[n - 2]) * (t - n * tau) / tau for t in s]
        ul = [u[0] + tau * w[1:n].sum(axis=0) + (t - t0) * w[n] for t in s]
        dw = [x - w[n] for x in wl]
        du = [x - u[n] for x in ul]
        gw += _trapz([d @ gstar @ d for d in dw], s)
        gu += _trapz([d @ gram_v @ d for d in du], s)
    return float(np.sqrt(gw)), float(np.sqrt(gu))
