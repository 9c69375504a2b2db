import json

import pytest

from fracap.cli import main

QUAD = {"problem": {"family": "smooth", "s": 0.5, "c": 1.0, "t": 1.0, "g": "u**2", "t_range": [-1.0, 1.0]},
        "grid": {"n": 64}, "solver": {"initial": 1.0}}
AR = {"problem": {"family": "attractive_repulsive", "s": 0.5, "c": 1.0, "mu": 2, "rho": 1, "gamma": 1,
                  "beta": -0.2, "e": "1+0.1*cos(x)"}, "grid": {"n": 64}}


def run(tmp_path, cmd, cfg, name="cfg.json", out="out"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    code = main([cmd, "--config", str(path), "--out", str(tmp_path / out)])
    return code, tmp_path / out


def report(out):
    return dict(line.split("=", 1) for line in (out / "report.txt").read_text().splitlines())


def test_fold_command(tmp_path):
    code, out = run(tmp_path, "fold", QUAD)
    assert code == 0
    rep = report(out)
    assert abs(float(rep["t1_numeric"])) < 1e-6
    assert (out / "branch.csv").exists() and (out / "branch.fields.csv").exists()


def test_solve_infeasible(tmp_path):
    cfg = json.loads(json.dumps(QUAD))
    cfg["problem"].update(h="cos(x)", t=-2.0)  # theta = -1
    code, out = run(tmp_path, "solve", cfg)
    assert code == 2
    assert not (out / "solution.csv").exists()
    assert report(out)["flag.infeasible"] == "true"


def test_solve_ok(tmp_path):
    code, out = run(tmp_path, "solve", QUAD)
    assert code == 0
    rep = report(out)
    assert float(rep["residual_sup"]) <= 1e-10
    assert rep["bound.sup_below_M"] == "true"
    assert len((out / "solution.csv").read_text().splitlines()) == 65


def test_certify_infeasible(tmp_path):
    cfg = json.loads(json.dumps(QUAD))
    cfg["problem"]["t"] = -0.5
    code, out = run(tmp_path, "certify", cfg)
    assert code == 2
    assert float(report(out)["theta"]) == pytest.approx(0.0, abs=1e-12)


def test_oracle_check(tmp_path, capsys):
    cfg = {"problem": {"family": "smooth", "s": 0.5, "t": 0, "g": "u**2"}, "grid": {"n": 128}}
    code, out = run(tmp_path, "oracle-check", cfg)
    assert code == 0
    assert float(report(out)["max_abs_diff"]) <= 1e-6
    assert "max_abs_diff=" in capsys.readouterr().out


def test_homotopy_command(tmp_path):
    code, out = run(tmp_path, "homotopy", AR)
    assert code == 0
    rep = report(out)
    assert rep["bound.min_below_A0"] == "true" and rep["bound.max_above_A1"] == "true"


def test_homotopy_wrong_family(tmp_path):
    code, _ = run(tmp_path, "homotopy", QUAD)
    assert code == 1


def test_continue_command(tmp_path):
    code, out = run(tmp_path, "continue", QUAD)
    assert code == 0
    assert int(report(out)["branch.folds"]) == 1


def test_solver_failure_exit(tmp_path, capsys):
    cfg = json.loads(json.dumps(QUAD))
    cfg["solver"] = {"initial": 50.0, "max_iter": 1, "seed_count": 1, "seed_center": 50.0, "seed_amplitude": 0.0}
    code, out = run(tmp_path, "solve", cfg)
    assert code == 3
    assert "solver failure" in capsys.readouterr().err
    assert not (out / "solution.csv").exists()


def test_bad_config_exit(tmp_path):
    code, _ = run(tmp_path, "solve", {"problem": {"family": "smooth", "s": 1.5, "t": 0, "g": "u"}})
    assert code == 1
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == 1


def test_deterministic_outputs(tmp_path):
    _, a = run(tmp_path, "fold", QUAD, out="a")
    _, b = run(tmp_path, "fold", QUAD, out="b")
    for name in ("branch.csv", "branch.fields.csv", "report.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
