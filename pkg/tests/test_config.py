import json

import pytest

from fracap import ProblemSpec, SchemaError, parse_config
from fracap.nonlinear import AttractiveRepulsive, SingularMems

MIN = {"problem": {"family": "smooth", "s": 0.5, "c": 1.0, "t": 0.25, "g": "u**2"}}


def dump(obj):
    return json.dumps(obj)


def test_defaults_filled():
    cfg = parse_config(dump(MIN))
    assert cfg.grid["n"] == 256
    assert cfg.solver["tol"] == 1e-10
    assert cfg.continuation["ds"] == 0.05
    p = cfg.build_problem()
    assert isinstance(p, ProblemSpec) and p.grid.n == 256 and p.t == 0.25


def test_order_out_of_range():
    bad = json.loads(dump(MIN))
    bad["problem"]["s"] = 1.5
    with pytest.raises(SchemaError) as exc:
        parse_config(dump(bad))
    assert exc.value.path == "problem.s"


def test_unknown_key():
    bad = dict(MIN, foo=1)
    with pytest.raises(SchemaError) as exc:
        parse_config(dump(bad))
    assert exc.value.path == "foo"


def test_nested_unknown_key():
    bad = json.loads(dump(MIN))
    bad["solver"] = {"tolerance": 1e-8}
    with pytest.raises(SchemaError) as exc:
        parse_config(dump(bad))
    assert exc.value.path == "solver.tolerance"


@pytest.mark.parametrize("patch,path", [
    ({"grid": {"n": 7}}, "grid.n"),
    ({"grid": {"n": 4}}, "grid.n"),
    ({"solver": {"tol": -1}}, "solver.tol"),
    ({"continuation": {"ds": 0}}, "continuation.ds"),
])
def test_range_rules(patch, path):
    bad = dict(json.loads(dump(MIN)), **patch)
    with pytest.raises(SchemaError) as exc:
        parse_config(dump(bad))
    assert exc.value.path == path


def test_family_requirements():
    with pytest.raises(SchemaError) as exc:
        parse_config(dump({"problem": {"family": "mems", "s": 0.5, "t": 2.0, "beta": 1}}))
    assert exc.value.path == "problem.mu"


def test_bad_expression_and_json():
    bad = json.loads(dump(MIN))
    bad["problem"]["h"] = "open('x')"
    with pytest.raises(SchemaError) as exc:
        parse_config(dump(bad))
    assert exc.value.path == "problem.h"
    with pytest.raises(SchemaError):
        parse_config("{not json")


def test_builds_singular_families():
    cfg = parse_config(dump({"problem": {"family": "mems", "s": 0.5, "c": 1, "t": 2, "mu": 2, "beta": "1+0.5*cos(x)"},
                             "grid": {"n": 32}}))
    assert isinstance(cfg.build_problem().kind, SingularMems)
    cfg = parse_config(dump({"problem": {"family": "attractive_repulsive", "s": 0.5, "c": 1, "mu": 2, "rho": 1,
                                         "gamma": 1, "beta": -0.2, "e": "1+0.1*cos(x)"}, "grid": {"n": 32}}))
    p = cfg.build_problem()
    assert isinstance(p.kind, AttractiveRepulsive) and p.t is None
