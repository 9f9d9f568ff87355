"""tau-refinement studies: errors, EOC, interpolant gaps, first-increment decay."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ReferenceFailure
from .diagnostics import apriori_quantities, first_increment_decay
from .inclusion import SolveOptions
from .interpolants import RotheInterpolants, interpolant_gaps
from .stepper import run_scheme
from .timegrid import TimeGrid

ERROR_KEYS = ("error_LinfH_w", "error_L2V_w", "error_LinfV_u", "gap_w_Vstar", "gap_u_V")
EXACT_TOL = 1e-9


def eoc(e_coarse: float, e_fine: float):
    """``log2(e_coarse / e_fine)``; ``"exact"`` when both are at round-off."""
    if e_coarse <= EXACT_TOL and e_fine <= EXACT_TOL:
        return "exact"
    if e_fine <= 0 or e_coarse <= 0:
        return float("nan")
    return math.log2(e_coarse / e_fine)


@dataclass
class StudyReport:
    levels: list
    eoc: dict
    decay: list = field(default_factory=list)
    reference: str = ""
    notes: list = field(default_factory=list)

    def column(self, key):
        return [lev[key] for lev in self.levels]

    def header(self):
        return (["N", "tau", *ERROR_KEYS, "first_increment", "a1", "a2", "a3", "a4", "a5", "a6", "a7"]
                + [f"eoc_{k}" for k in ERROR_KEYS])

    def rows(self):
        out = []
        for i, lev in enumerate(self.levels):
            row = [lev["N"], lev["tau"], *(lev[k] for k in ERROR_KEYS), lev["first_increment"],
                   *(lev[f"a{k}"] for k in range(1, 8))]
            row += ["" if i == 0 else self.eoc[k][i - 1] for k in ERROR_KEYS]
            out.append(row)
        return out


def nodal_errors(traj, u_at, w_at):
    """Errors of a trajectory against node functions ``u_at(n)``, ``w_at(n)``."""
    s = traj.setting
    tau = traj.tau
    ew = [traj.w[n] - w_at(n) for n in range(traj.N + 1)]
    eu = [traj.u[n] - u_at(n) for n in range(traj.N + 1)]
    return {
        "error_LinfH_w": max(s.norm_h(e) for e in ew),
        "error_L2V_w": math.sqrt(tau * sum(s.norm_v(e) ** 2 for e in ew[1:])),
        "error_LinfV_u": max(s.norm_v(e) for e in eu),
    }


def run_study(problem, horizon: float, ladder, opts: Optional[SolveOptions] = None, case=None,
              n_ref: Optional[int] = None, cap_C: Optional[float] = None, seed: int = 0) -> StudyReport:
    """Run every ladder level and measure against ``case`` (exact) or a fine reference.

    Raises :class:`ReferenceFailure` when the reference run fails; level
    failures propagate as the stepper raised them.
    """
    ladder = [int(n) for n in ladder]
    if len(ladder) < 2 or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must hold at least 2 strictly increasing N values")
    opts = opts or SolveOptions()
    notes = []
    if case is not None:
        reference = "manufactured exact solution"
        ref = None
    else:
        n_ref = n_ref or 8 * ladder[-1]
        if n_ref < 8 * ladder[-1] or any(n_ref % n for n in ladder):
            raise ValueError("N_ref must be >= 8 x the finest level and divisible by every level")
        try:
            ref = run_scheme(problem, TimeGrid(horizon, n_ref), opts, cap_C, seed=seed)
        except Exception as exc:
            raise ReferenceFailure(f"reference run N_ref={n_ref} failed: {exc}") from exc
        reference = f"fine reference N_ref={n_ref}"

    levels, trajs = [], []
    for N in ladder:
        grid = TimeGrid(horizon, N)
        traj = run_scheme(problem, grid, opts, cap_C, seed=seed)
        trajs.append(traj)
        if case is not None:
            errs = nodal_errors(traj, lambda n: case.u_exact(grid.node(n)), lambda n: case.w_exact(grid.node(n)))
        else:
            k = n_ref // N
            errs = nodal_errors(traj, lambda n: ref.u[n * k], lambda n: ref.w[n * k])
        gap_w, gap_u = interpolant_gaps(RotheInterpolants(traj))
        lev = {"N": N, "tau": grid.tau, **errs, "gap_w_Vstar": gap_w, "gap_u_V": gap_u,
               "first_increment": traj.setting.norm_h(traj.w[1] - traj.w[0]), **apriori_quantities(traj)}
        levels.append(lev)
        notes.extend(f"N={N}: {m}" for m in traj.notes)
    rates = {k: [eoc(a[k], b[k]) for a, b in zip(levels, levels[1:])] for k in ERROR_KEYS}
    decay = first_increment_decay(trajs) if len(trajs) >= 3 else []
    return StudyReport(levels, rates, decay, reference, notes)
