"""Bit-stable CSV and key=value writers, plus branch re-import."""
import csv
from pathlib import Path

import numpy as np

from .continuation import Branch
from .errors import PreconditionError
from .nonlinear import make_solution, residual_values
from .spectral import SpectralField

BRANCH_HEADER = ["t", "u_mean", "u_min", "u_max", "l2_deriv", "residual_sup", "iterations", "fold_flag"]


def fmt(value):
    """Canonical text form: 17 significant digits for floats."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def fields_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".fields" + path.suffix)


def export_branch(branch, path):
    """Write the summary CSV and a companion ``.fields.csv`` with nodal values."""
    if not branch.points:
        raise PreconditionError("cannot export an empty branch")
    folds = set(branch.folds)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BRANCH_HEADER)
        for i, sol in enumerate(branch.points):
            d = sol.diagnostics
            w.writerow([fmt(float(sol.t)), fmt(d["mean"]), fmt(d["min"]), fmt(d["max"]), fmt(d["l2_deriv"]),
                        fmt(sol.residual_sup), fmt(sol.iterations), fmt(int(i in folds))])
    n = branch.points[0].u.n
    with open(fields_path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"u{j}" for j in range(n)])
        for sol in branch.points:
            w.writerow([fmt(float(sol.t))] + [fmt(v) for v in sol.u.values])


def import_branch(path, problem, tol=1e-10):
    """Rebuild a :class:`Branch` from an exported pair of files, recomputing residuals."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    with open(fields_path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        fields = [[float(v) for v in row] for row in reader]
    if len(rows) != len(fields):
        raise ValueError("summary and field files disagree on the number of points")
    branch = Branch(problem=problem)
    for i, (row, vals) in enumerate(zip(rows, fields)):
        p = problem.with_t(vals[0]) if problem.has_parameter else problem
        u = SpectralField(problem.grid, vals[1:])
        rs = float(np.max(np.abs(residual_values(u.values, p))))
        branch.points.append(make_solution(u, p, rs, int(row["iterations"]), tol))
        if row["fold_flag"] == "1":
            branch.folds.append(i)
    return branch


def export_solution(sol, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u"])
        for x, v in zip(sol.u.grid.nodes, sol.u.values):
            w.writerow([fmt(x), fmt(v)])


def format_report(mapping):
    return "".join(f"{key}={fmt(mapping[key])}\n" for key in sorted(mapping))


def write_report(mapping, path):
    """Flat ``key=value`` document, keys sorted."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_report(mapping))
