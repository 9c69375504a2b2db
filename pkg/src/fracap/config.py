"""JSON experiment configuration: schema validation, defaults, problem assembly."""
import copy
import json
from dataclasses import dataclass

import jsonschema

from .errors import SchemaError
from .expr import Expression
from .nonlinear import AttractiveRepulsive, ProblemSpec, SingularMems, Smooth
from .spectral import PeriodicGrid, sample

_NUM = {"type": "number"}
_EXPR = {"type": ["string", "number"]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["problem"],
    "properties": {
        "problem": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family", "s"],
            "properties": {
                "family": {"enum": ["smooth", "mems", "attractive_repulsive"]},
                "s": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "c": {"type": "number", "minimum": 0},
                "t": _NUM,
                "t_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "t2": _NUM,
                "g": {"type": "string"},
                "dg": {"type": "string"},
                "h": _EXPR,
                "mu": {"type": "number", "minimum": 1},
                "rho": {"type": "number", "exclusiveMinimum": 0},
                "beta": _EXPR,
                "gamma": _EXPR,
                "e": _EXPR,
            },
            "allOf": [
                {"if": {"properties": {"family": {"const": "smooth"}}},
                 "then": {"required": ["g", "t"]}},
                {"if": {"properties": {"family": {"const": "mems"}}},
                 "then": {"required": ["mu", "beta", "t"]}},
                {"if": {"properties": {"family": {"const": "attractive_repulsive"}}},
                 "then": {"required": ["mu", "rho", "gamma", "beta", "e"]}},
            ],
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n": {"type": "integer", "minimum": 8, "maximum": 4096, "multipleOf": 2}},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-2},
                "max_iter": {"type": "integer", "minimum": 1, "maximum": 1000},
                "seeds": {"type": "integer", "minimum": 0},
                "seed_count": {"type": "integer", "minimum": 1, "maximum": 1000},
                "seed_center": _NUM,
                "seed_amplitude": {"type": "number", "minimum": 0},
                "initial": _EXPR,
            },
        },
        "continuation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ds": {"type": "number", "exclusiveMinimum": 0, "maximum": 10},
                "max_steps": {"type": "integer", "minimum": 1, "maximum": 100000},
                "direction": {"enum": [-1, 1]},
            },
        },
        "homotopy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"lambda_steps": {"type": "integer", "minimum": 1, "maximum": 10000}},
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "u": {"type": "string"},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "branch": {"type": "string", "minLength": 1},
                "report": {"type": "string", "minLength": 1},
                "solution": {"type": "string", "minLength": 1},
            },
        },
    },
}

DEFAULTS = {
    "problem": {"c": 0.0, "h": 0.0},
    "grid": {"n": 256},
    "solver": {"tol": 1e-10, "max_iter": 50, "seeds": 0, "seed_count": 20, "seed_amplitude": 1.0},
    "continuation": {"ds": 0.05, "max_steps": 200, "direction": -1},
    "homotopy": {"lambda_steps": 20},
    "oracle": {"tol": 1e-8, "u": "cos(x) + 0.3*sin(3*x)"},
    "outputs": {"branch": "branch.csv", "report": "report.txt", "solution": "solution.csv"},
}


@dataclass
class ExperimentConfig:
    problem: dict
    grid: dict
    solver: dict
    continuation: dict
    homotopy: dict
    oracle: dict
    outputs: dict

    @property
    def family(self):
        return self.problem["family"]

    def make_grid(self):
        return PeriodicGrid(self.grid["n"])

    def build_problem(self, t=None):
        """Assemble the :class:`ProblemSpec` described by the configuration."""
        pr = self.problem
        grid = self.make_grid()
        h = sample(pr["h"], grid)
        if pr["family"] == "smooth":
            g = Expression(pr["g"], ("u",))
            dg = Expression(pr["dg"], ("u",)) if "dg" in pr else None
            kind = Smooth(g=g, dg=dg)
        elif pr["family"] == "mems":
            kind = SingularMems(mu=float(pr["mu"]), beta=sample(pr["beta"], grid))
        else:
            kind = AttractiveRepulsive(
                mu=float(pr["mu"]), rho=float(pr["rho"]), gamma=sample(pr["gamma"], grid),
                beta=sample(pr["beta"], grid), e=sample(pr["e"], grid),
            )
        tval = pr.get("t") if t is None else t
        return ProblemSpec(grid=grid, s=float(pr["s"]), c=float(pr["c"]), kind=kind,
                           t=None if tval is None else float(tval), h=h)


def _error_path(err):
    path = ".".join(str(x) for x in err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            path = f"{path}.{extra[0]}" if path else extra[0]
    elif err.validator == "required" and isinstance(err.validator_value, list):
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            path = f"{path}.{missing[0]}" if path else missing[0]
    return path


def parse_config(text):
    """Parse and validate a JSON configuration, filling documented defaults."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise SchemaError(_error_path(err), err.message)
    merged = copy.deepcopy(DEFAULTS)
    for key, val in data.items():
        merged[key].update(val)
    # expressions are checked now so bad input fails at parse time
    pr = merged["problem"]
    for key in ("h", "beta", "gamma", "e"):
        if isinstance(pr.get(key), str):
            _check_expr(pr[key], ("x",), f"problem.{key}")
    for key in ("g", "dg"):
        if key in pr:
            _check_expr(pr[key], ("u",), f"problem.{key}")
    if isinstance(merged["solver"].get("initial"), str):
        _check_expr(merged["solver"]["initial"], ("x",), "solver.initial")
    _check_expr(merged["oracle"]["u"], ("x",), "oracle.u")
    return ExperimentConfig(**merged)


def _check_expr(text, variables, path):
    try:
        Expression(text, variables)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
