"""CSV and SVG writers."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(x) -> str:
    """Full double precision (17 significant digits); strings pass through."""
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])
    return path


def trajectory_rows(traj):
    dv, du = traj.u.shape[1], traj.xi.shape[1]
    header = (["t"] + [f"u{k}" for k in range(dv)] + [f"w{k}" for k in range(dv)]
              + [f"xi{k}" for k in range(du)] + ["residual"])
    t = traj.grid.nodes
    rows = []
    for n in range(traj.N + 1):
        xi = [None] * du if n == 0 else list(traj.xi[n - 1])
        res = None if n == 0 else traj.residuals[n - 1]
        rows.append([t[n], *traj.u[n], *traj.w[n], *xi, res])
    return header, rows


def write_trajectory_csv(traj, path) -> Path:
    header, rows = trajectory_rows(traj)
    return write_csv(path, header, rows)


def write_bounds_csv(reports, path) -> Path:
    """``reports`` is an iterable of ``(level_N, BoundReport)``."""
    rows = [(r.name, r.value, n) for n, rep in reports for r in rep.records]
    return write_csv(path, ["bound", "value", "level"], rows)


def write_interpolant_csv(interp, which: str, samples: int, path) -> Path:
    T = interp.traj.grid.horizon_T
    ts = np.linspace(0.0, T, samples)
    vals = [interp.eval(which, float(t)) for t in ts]
    header = ["t"] + [f"{which}{k}" for k in range(len(vals[0]))]
    return write_csv(path, header, ([t, *v] for t, v in zip(ts, vals)))


def write_solver_trace(result, path, step=None) -> Path:
    """Append one solve's (eps, smoothed residual, inclusion residual) trace."""
    path = Path(path)
    new = not path.exists()
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        if new:
            wr.writerow(["step", "iteration", "eps", "residual", "inclusion_residual"])
        for i, (eps, res, incl) in enumerate(result.trace):
            wr.writerow([fmt(step if step is not None else -1), i, fmt(eps), fmt(res), fmt(incl)])
    return path


# -- SVG ------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        return [float(k) for k in range(a, b + 1)]
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / 4))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step) + 1)]


def line_plot_svg(series, path, title="", xlabel="", ylabel="", logx=False, logy=False,
                  width=640, height=420) -> Path:
    """Polyline plot; ``series`` is a list of ``(label, xs, ys)``. Non-positive values are dropped on log axes."""
    pts = []
    for label, xs, ys in series:
        keep = [(float(x), float(y)) for x, y in zip(xs, ys)
                if math.isfinite(float(x)) and math.isfinite(float(y))
                and (not logx or x > 0) and (not logy or y > 0)]
        tx = [math.log10(x) if logx else x for x, _ in keep]
        ty = [math.log10(y) if logy else y for _, y in keep]
        pts.append((label, tx, ty))
    allx = [x for _, xs, _ in pts for x in xs] or [0.0, 1.0]
    ally = [y for _, _, ys in pts for y in ys] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    sx = lambda x: ml + (x - x0) / (x1 - x0) * pw
    sy = lambda y: mt + ph - (y - y0) / (y1 - y0) * ph
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for tv in _ticks(x0, x1, logx):
        if x0 - 1e-12 <= tv <= x1 + 1e-12:
            lab = f"1e{int(tv)}" if logx else f"{tv:.4g}"
            out.append(f'<line x1="{sx(tv):.2f}" y1="{mt + ph}" x2="{sx(tv):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{sx(tv):.2f}" y="{mt + ph + 18}" text-anchor="middle" font-size="11">{lab}</text>')
    for tv in _ticks(y0, y1, logy):
        if y0 - 1e-12 <= tv <= y1 + 1e-12:
            lab = f"1e{int(tv)}" if logy else f"{tv:.4g}"
            out.append(f'<line x1="{ml - 5}" y1="{sy(tv):.2f}" x2="{ml}" y2="{sy(tv):.2f}" stroke="black"/>')
            out.append(f'<text x="{ml - 8}" y="{sy(tv) + 4:.2f}" text-anchor="end" font-size="11">{lab}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>')
    for i, (label, xs, ys) in enumerate(pts):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}">'
                   f'<title>{label}</title></polyline>')
        out.append(f'<text x="{ml + 10}" y="{mt + 16 + 14 * i}" font-size="11" fill="{color}">{label}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path
