"""JSON configuration: schema, loading, and problem construction."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .errors import ConfigError
from .inclusion import SolveOptions
from .problems import (
    build_rod_problem,
    linear_problem,
    manufactured_problem,
    polynomial_motion,
    scalar_problem,
    sine_motion,
    smooth_linear_base,
    zero_problem,
    friction_potential,
)
from .spaces import GalerkinSetting, abs_law, quadratic_law, separable_superpotential, zero_law
from .timegrid import polynomial_load, table_load, zero_load

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}

LAW_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["zero", "abs", "quadratic", "friction"]},
        "scale": _NUM,
        "stiffness": _NUM,
        "mu_static": {"type": "number", "exclusiveMinimum": 0},
        "mu_kinetic": {"type": "number", "exclusiveMinimum": 0},
        "slope": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

LOAD_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["zero", "polynomial", "table"]},
        "coefficients": _MAT,
        "times": _VEC,
        "values": _MAT,
        "quadrature_order": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["problem", "ladder"],
    "properties": {
        "problem": {
            "type": "object",
            "required": ["builder"],
            "properties": {
                "builder": {"enum": ["rod", "scalar", "zero", "smooth_linear", "linear"]},
                "params": {"type": "object"},
                "load": LOAD_SCHEMA,
                "manufactured": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["sine", "polynomial"]},
                        "mode": _VEC,
                        "omega": _NUM,
                        "phase": _NUM,
                        "coefficients": _MAT,
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "ladder": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "solver": {
            "type": "object",
            "properties": {
                "strategy": {"enum": ["smoothing-newton", "picard", "scalar-oracle"]},
                "epsilon_ladder": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                                   "minItems": 1},
                "max_iters": {"type": "integer", "minimum": 1},
                "tol_residual": {"type": "number", "exclusiveMinimum": 0},
                "damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            "additionalProperties": False,
        },
        "reference": {
            "type": "object",
            "properties": {"N_ref": {"type": "integer", "minimum": 2}},
            "additionalProperties": False,
        },
        "seed": {"type": "integer"},
        "emit_plots": {"type": "boolean"},
        "out": {"type": "string"},
        "cap_C": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

_PARAMS = {
    "rod": {"elements", "viscosity", "elasticity", "mu_static", "mu_kinetic", "slope", "u0", "w0"},
    "scalar": {"alpha", "b", "law", "growth_d", "u0", "w0"},
    "zero": {"dim"},
    "smooth_linear": {"dim", "seed", "stiffness"},
    "linear": {"gram_v", "gram_h", "trace", "gram_u", "A", "B", "laws", "growth_d", "u0", "w0", "alpha", "beta"},
}


@dataclass
class StudyConfig:
    raw: dict
    problem: object
    case: Optional[object]
    horizon: float
    ladder: list
    solver: SolveOptions
    n_ref: Optional[int]
    seed: int
    emit_plots: bool
    out: str
    cap_C: Optional[float]


def _path(err) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def _law(spec, where):
    kind = spec["kind"]
    try:
        if kind == "zero":
            return zero_law()
        if kind == "abs":
            return abs_law(spec.get("scale", 1.0))
        if kind == "quadratic":
            return quadratic_law(spec.get("stiffness", 1.0))
        return friction_potential(spec.get("mu_static", 1.0), spec.get("mu_kinetic", 1.0), spec.get("slope", 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc), where) from exc


def _law_bound(law_spec):
    kind = law_spec["kind"]
    if kind == "abs":
        return abs(law_spec.get("scale", 1.0))
    if kind == "quadratic":
        return abs(law_spec.get("stiffness", 1.0))
    if kind == "friction":
        return law_spec.get("mu_static", 1.0)
    return 1.0


def _load(spec, dim, where):
    if spec is None:
        return None
    kind = spec["kind"]
    order = spec.get("quadrature_order", 4)
    if kind == "zero":
        return zero_load(dim)
    if kind == "polynomial":
        c = np.asarray(spec.get("coefficients", [[0.0] * dim]), dtype=float)
        if c.shape[1] != dim:
            raise ConfigError(f"load coefficients need {dim} columns", where + "/coefficients")
        return polynomial_load(c, order)
    if "times" not in spec or "values" not in spec:
        raise ConfigError("table load needs times and values", where)
    vals = np.asarray(spec["values"], dtype=float)
    if vals.shape != (len(spec["times"]), dim):
        raise ConfigError(f"table values must have shape ({len(spec['times'])}, {dim})", where + "/values")
    try:
        return table_load(spec["times"], vals, order)
    except ValueError as exc:
        raise ConfigError(str(exc), where + "/times") from exc


def build_problem(block: dict):
    builder = block["builder"]
    params = dict(block.get("params", {}))
    unknown = set(params) - _PARAMS[builder]
    if unknown:
        raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for builder {builder}",
                          "/problem/params/" + sorted(unknown)[0])
    try:
        if builder == "rod":
            p = build_rod_problem(**params)
        elif builder == "scalar":
            law_spec = params.pop("law", {"kind": "zero"})
            jsonschema.validate(law_spec, LAW_SCHEMA)
            law = _law(law_spec, "/problem/params/law")
            d = params.pop("growth_d", _law_bound(law_spec))
            p = scalar_problem(law=None if law_spec["kind"] == "zero" else law, growth_d=d, **params)
        elif builder == "zero":
            p = zero_problem(params.get("dim", 2))
        elif builder == "smooth_linear":
            p = smooth_linear_base(**params)
        else:
            setting = GalerkinSetting(params["gram_v"], params["gram_h"], params["trace"],
                                      params.get("gram_u", np.eye(np.atleast_2d(params["trace"]).shape[0])))
            laws = params.get("laws")
            j = None
            if laws:
                for k, ls in enumerate(laws):
                    jsonschema.validate(ls, LAW_SCHEMA)
                j = separable_superpotential([_law(ls, f"/problem/params/laws/{k}") for ls in laws],
                                             params.get("growth_d", max(_law_bound(ls) for ls in laws)))
            p = linear_problem(setting, params["A"], params["B"], j, None, params.get("u0"), params.get("w0"),
                               alpha=params.get("alpha"), beta=params.get("beta", 0.0))
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message, "/problem/params" + _path(exc)) from exc
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc.args[0]}", f"/problem/params/{exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "/problem/params") from exc

    load = _load(block.get("load"), p.setting.dim_v, "/problem/load")
    if load is not None:
        from dataclasses import replace
        p = replace(p, load=load)
    return p


def parse_config(raw: dict) -> StudyConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message, _path(exc)) from exc
    ladder = list(raw["ladder"])
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("ladder must be strictly increasing", "/ladder")
    block = raw["problem"]
    problem = build_problem(block)
    horizon = float(raw.get("horizon", 1.0))
    case = None
    man = block.get("manufactured")
    if man is not None:
        dim = problem.setting.dim_v
        if man["kind"] == "sine":
            mode = man.get("mode", [1.0] * dim)
            if len(mode) != dim:
                raise ConfigError(f"mode needs {dim} entries", "/problem/manufactured/mode")
            motion = sine_motion(mode, man.get("omega", 1.0), man.get("phase", 0.0))
        else:
            coeffs = np.asarray(man.get("coefficients", [[0.0] * dim]), dtype=float)
            if coeffs.shape[1] != dim:
                raise ConfigError(f"coefficients need {dim} columns", "/problem/manufactured/coefficients")
            motion = polynomial_motion(coeffs)
        try:
            problem, case = manufactured_problem(problem, motion, horizon)
        except ValueError as exc:
            raise ConfigError(str(exc), "/problem/manufactured") from exc
    sv = raw.get("solver", {})
    try:
        solver = SolveOptions(**sv)
    except ValueError as exc:
        raise ConfigError(str(exc), "/solver") from exc
    ref = raw.get("reference", {})
    return StudyConfig(raw, problem, case, horizon, ladder, solver, ref.get("N_ref"), raw.get("seed", 0),
                       raw.get("emit_plots", False), raw.get("out", "out"), raw.get("cap_C"))


def load_config(path) -> StudyConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "") from exc
    return parse_config(raw)
