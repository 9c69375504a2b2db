"""Command-line driver: ``fracap <command> --config <path> [--out <dir>]``."""
import argparse
import sys
from pathlib import Path

import numpy as np

from . import certificates as cert
from .config import load_config
from .continuation import continue_arclength, locate_fold, mawhin_homotopy
from .errors import FracapError, MissingCertificate, NoFoldInBranch, PreconditionError, SolverError
from .export import export_branch, export_solution, format_report, write_report
from .expr import ExpressionError
from .fractional import apply_fractional, build_pv_kernel, pv_apply
from .nonlinear import AttractiveRepulsive, SingularMems, deflated_search, newton_solve, random_seeds
from .spectral import norms, sample

COMMANDS = ("solve", "continue", "fold", "homotopy", "certify", "oracle-check")
EXIT_OK, EXIT_IO, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 1, 2, 3


def _initial_guess(cfg, p):
    init = cfg.solver.get("initial")
    if init is not None:
        return sample(init, p.grid)
    if isinstance(p.kind, SingularMems):
        return sample(max(p.t, 1.0), p.grid)
    return sample(0.0, p.grid)


def _solve(cfg, p):
    """Newton from the configured guess, then deflated search over random seeds."""
    sv = cfg.solver
    try:
        return newton_solve(_initial_guess(cfg, p), p, tol=sv["tol"], max_iter=sv["max_iter"])
    except SolverError:
        pass
    center = sv.get("seed_center", 1.0 if p.singular else 0.0)
    seeds = random_seeds(p.grid, sv["seed_count"], sv["seeds"], center=center, amplitude=sv["seed_amplitude"])
    found = deflated_search(p, seeds, tol=sv["tol"], max_iter=sv["max_iter"])
    if not found:
        raise SolverError("no seed converged")
    return found[0]


def _certificate(cfg, p):
    t2 = cfg.problem.get("t2")
    return cert.certify(p, t2=t2)


def _solution_summary(sol, p, rep):
    out = {
        "residual_sup": sol.residual_sup,
        "iterations": sol.iterations,
        "u_mean": sol.diagnostics["mean"],
        "u_min": sol.diagnostics["min"],
        "u_max": sol.diagnostics["max"],
        "l2_deriv": sol.diagnostics["l2_deriv"],
    }
    ids = cert.verify_identities(sol, p, theta=rep.theta)
    out.update({f"identity.{k}": v for k, v in ids.items()})
    try:
        bounds = cert.verify_bounds(sol, rep, p)
    except MissingCertificate:
        bounds = {}
    for name, (ok, margin) in bounds.items():
        out[f"bound.{name}"] = ok
        out[f"bound.{name}.margin"] = margin
    return out


def _infeasible(rep):
    return bool(rep.flags.get("infeasible", False))


def _base(cfg, p, command):
    out = {"command": command, "family": cfg.family, "n": p.grid.n, "s": p.s, "c": p.c}
    if p.t is not None:
        out["t"] = p.t
    return out


def _emit(report, out_dir, cfg):
    write_report(report, out_dir / cfg.outputs["report"])
    sys.stdout.write(format_report(report))


def cmd_solve(cfg, out_dir):
    p = cfg.build_problem()
    rep = _certificate(cfg, p)
    report = _base(cfg, p, "solve")
    report.update(rep.as_dict())
    if _infeasible(rep):
        report["status"] = "infeasible"
        _emit(report, out_dir, cfg)
        return EXIT_INFEASIBLE
    sol = mawhin_homotopy(p, cfg.homotopy["lambda_steps"], tol=cfg.solver["tol"]) \
        if isinstance(p.kind, AttractiveRepulsive) else _solve(cfg, p)
    report.update(_solution_summary(sol, p, rep))
    report["status"] = "solved"
    export_solution(sol, out_dir / cfg.outputs["solution"])
    _emit(report, out_dir, cfg)
    return EXIT_OK


def _trace(cfg, p):
    sol = _solve(cfg, p)
    bounds = cfg.problem.get("t_range")
    cont = cfg.continuation
    return continue_arclength(p, sol, ds=cont["ds"], max_steps=cont["max_steps"], direction=cont["direction"],
                              tol=cfg.solver["tol"], t_bounds=tuple(sorted(bounds)) if bounds else None)


def _branch_summary(branch):
    ts = branch.t_values
    return {
        "branch.points": len(branch.points),
        "branch.folds": len(branch.folds),
        "branch.stop_reason": branch.stop_reason,
        "branch.t_min": float(ts.min()),
        "branch.t_max": float(ts.max()),
        "branch.max_residual": max(sol.residual_sup for sol in branch.points),
    }


def cmd_continue(cfg, out_dir):
    p = cfg.build_problem()
    if not p.has_parameter:
        raise PreconditionError("continuation needs a family with a parameter t")
    branch = _trace(cfg, p)
    export_branch(branch, out_dir / cfg.outputs["branch"])
    report = _base(cfg, p, "continue")
    report.update(_branch_summary(branch))
    _emit(report, out_dir, cfg)
    return EXIT_OK


def cmd_fold(cfg, out_dir):
    p = cfg.build_problem()
    if not p.has_parameter:
        raise PreconditionError("fold location needs a family with a parameter t")
    branch = _trace(cfg, p)
    export_branch(branch, out_dir / cfg.outputs["branch"])
    rep = _certificate(cfg, p)
    report = _base(cfg, p, "fold")
    report.update(_branch_summary(branch))
    fold = locate_fold(branch, tol=cfg.solver["tol"])
    rep.t1_numeric = fold["t1"]
    report.update(rep.as_dict())
    report.pop("flag.infeasible", None)
    report["fold.tangent_dt"] = fold["tangent_dt"]
    report["fold.u_mean"] = float(np.mean(fold["u_fold"].values))
    if rep.theta is not None:
        report["flag.theta_below_t1"] = bool(rep.theta <= fold["t1"] + 1e-6)
    _emit(report, out_dir, cfg)
    return EXIT_OK


def cmd_homotopy(cfg, out_dir):
    p = cfg.build_problem()
    if not isinstance(p.kind, AttractiveRepulsive):
        raise PreconditionError("the homotopy command needs the attractive_repulsive family")
    rep = _certificate(cfg, p)
    sol = mawhin_homotopy(p, cfg.homotopy["lambda_steps"], tol=cfg.solver["tol"])
    report = _base(cfg, p, "homotopy")
    report.update(rep.as_dict())
    report["a_start"] = sol.diagnostics["a_start"]
    report["start_error"] = sol.diagnostics["start_error"]
    report["lambda_count"] = len(sol.diagnostics["lambdas"])
    report.update(_solution_summary(sol, p, rep))
    export_solution(sol, out_dir / cfg.outputs["solution"])
    _emit(report, out_dir, cfg)
    return EXIT_OK


def cmd_certify(cfg, out_dir):
    p = cfg.build_problem()
    rep = _certificate(cfg, p)
    report = _base(cfg, p, "certify")
    report.update(rep.as_dict())
    _emit(report, out_dir, cfg)
    return EXIT_INFEASIBLE if _infeasible(rep) else EXIT_OK


def cmd_oracle_check(cfg, out_dir):
    grid = cfg.make_grid()
    s = float(cfg.problem["s"])
    kernel = build_pv_kernel(s, grid, cfg.oracle["tol"])
    u = sample(cfg.oracle["u"], grid)
    diff = pv_apply(u, kernel) - apply_fractional(u, s)
    err = norms(diff)["sup"]
    report = {
        "command": "oracle-check", "n": grid.n, "s": s, "max_abs_diff": err,
        "c1s": kernel.c1s, "image_count": kernel.image_count, "panels": kernel.panels,
        "tail_bound": kernel.tail_bound, "quadrature_error": kernel.quadrature_error,
        "pass": err <= 1e-6,
    }
    _emit(report, out_dir, cfg)
    return EXIT_OK if err <= 1e-6 else EXIT_SOLVER


HANDLERS = {
    "solve": cmd_solve,
    "continue": cmd_continue,
    "fold": cmd_fold,
    "homotopy": cmd_homotopy,
    "certify": cmd_certify,
    "oracle-check": cmd_oracle_check,
}


def run_command(cmd, config, out_dir="."):
    """Run one command on a parsed config; returns the process exit code."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        return HANDLERS[cmd](config, out_dir)
    except (OSError, PreconditionError, ExpressionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverError, NoFoldInBranch, FracapError) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv=None):
    parser = argparse.ArgumentParser(prog="fracap", description="Periodic fractional Ambrosetti-Prodi toolkit")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment configuration")
    parser.add_argument("--out", default=".", help="output directory (default: current directory)")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, FracapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run_command(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
