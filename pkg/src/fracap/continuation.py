"""Parameter continuation in t, fold location, and the Mawhin homotopy."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .certificates import _ar_kind, phi_mean, phi_roots
from .errors import (
    HomotopyStall,
    NoBracket,
    NoFoldInBranch,
    PreconditionError,
    SeedFailed,
    SolverError,
    StepCollapse,
)
from .fractional import linear_matrix
from .nonlinear import (
    AttractiveRepulsive,
    POSITIVITY_FLOOR,
    DEFAULT_TOL,
    apply_linear_values,
    damped_newton,
    jacobian_values,
    make_solution,
    newton_solve,
    nonlinearity,
    nonlinearity_derivative,
    residual_values,
)
from .spectral import SpectralField

FOLD_TOL = 1e-8


@dataclass
class Branch:
    problem: object
    points: list = field(default_factory=list)
    tangents: list = field(default_factory=list)
    folds: list = field(default_factory=list)
    stop_reason: str = ""
    ds: Optional[float] = None

    def __len__(self):
        return len(self.points)

    @property
    def t_values(self):
        return np.array([sol.t for sol in self.points])


@dataclass
class HomotopyState:
    lam: float
    u: SpectralField
    a_start: float


def _require_parameter(p):
    if not p.has_parameter:
        raise PreconditionError("continuation in t needs a family with a parameter t")


# ---------------------------------------------------------------------------
# natural parameter continuation

def continue_natural(p, t_from, t_to, dt, seed, tol=DEFAULT_TOL, max_iter=50, dt_min=1e-6):
    """March t from ``t_from`` toward ``t_to`` reusing the last solution as predictor."""
    _require_parameter(p)
    try:
        first = newton_solve(seed, p.with_t(t_from), tol=tol, max_iter=max_iter)
    except SolverError as exc:
        raise SeedFailed(f"seed did not converge at t={t_from}: {exc}") from None
    branch = Branch(problem=p, points=[first], ds=abs(dt))
    step = np.sign(t_to - t_from) * abs(dt)
    t, u = float(t_from), first.u
    while (t_to - t) * np.sign(step) > 1e-14:
        h = step if abs(step) <= abs(t_to - t) else t_to - t
        try:
            sol = newton_solve(u, p.with_t(t + h), tol=tol, max_iter=max_iter)
        except SolverError:
            step *= 0.5
            if abs(step) < dt_min:
                branch.stop_reason = "FoldSuspected"
                break
            continue
        t, u = t + h, sol.u
        branch.points.append(sol)
    else:
        branch.stop_reason = "completed"
    for sol in branch.points:
        branch.tangents.append(_tangent(sol.u.values, sol.t, p, None, np.sign(step)))
    return branch


# ---------------------------------------------------------------------------
# pseudo-arclength

def _weight(n):
    return 1.0 / n


def _normalize(du, dt):
    scale = np.sqrt(_weight(du.size) * du @ du + dt * dt)
    return du / scale, dt / scale


def _bordered(u, t, p, ref_u, ref_t):
    n = u.size
    jac = np.empty((n + 1, n + 1))
    jac[:n, :n] = jacobian_values(u, p.with_t(t))
    jac[:n, n] = -1.0
    jac[n, :n] = _weight(n) * ref_u
    jac[n, n] = ref_t
    return jac


def _tangent(u, t, p, prev, direction=-1.0):
    """Unit tangent of the solution curve, oriented along ``prev`` (or ``direction`` in t)."""
    n = u.size
    ref_u, ref_t = prev if prev is not None else (np.zeros(n), float(direction))
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    z = np.linalg.solve(_bordered(u, t, p, ref_u, ref_t), rhs)
    return _normalize(z[:n], z[n])


def _corrector(u_prev, t_prev, tan, ds, p, tol, max_iter, floor):
    n = u_prev.size
    tu, tt = tan
    w = _weight(n)

    def res(z):
        u, t = z[:n], z[n]
        r = np.empty(n + 1)
        r[:n] = residual_values(u, p.with_t(t))
        r[n] = w * tu @ (u - u_prev) + tt * (t - t_prev) - ds
        return r

    def jac(z):
        return _bordered(z[:n], z[n], p, tu, tt)

    admissible = (lambda z: np.min(z[:n]) > floor) if p.singular else None
    z0 = np.append(u_prev + ds * tu, t_prev + ds * tt)
    z, _, it = damped_newton(z0, res, jac, tol, max_iter, admissible=admissible)
    return z[:n], float(z[n]), it


def continue_arclength(p, seed, ds=0.05, max_steps=200, direction=-1.0, tol=DEFAULT_TOL,
                       max_iter=25, ds_min=1e-8, t_bounds=None, min_u_floor=POSITIVITY_FLOOR):
    """Pseudo-arclength continuation from a converged ``seed``.

    The first tangent points toward decreasing t when ``direction < 0``; later
    tangents keep a positive inner product with their predecessor.  Sign
    changes of the t-component are recorded as folds.  Stops after
    ``max_steps`` accepted points or when t leaves ``t_bounds``.
    """
    _require_parameter(p)
    u, t = seed.u.values, float(seed.t)
    tan = _tangent(u, t, p, None, direction)
    branch = Branch(problem=p, points=[seed], tangents=[tan], ds=ds)
    h = ds
    while len(branch.points) <= max_steps:
        try:
            u_new, t_new, it = _corrector(u, t, tan, h, p, tol, max_iter, min_u_floor)
            tan_new = _tangent(u_new, t_new, p, tan)
        except (SolverError, np.linalg.LinAlgError):
            h *= 0.5
            if h < ds_min:
                raise StepCollapse(f"step collapsed below {ds_min} near t={t:.6g}") from None
            continue
        pt = p.with_t(t_new)
        rs = float(np.max(np.abs(residual_values(u_new, pt))))
        branch.points.append(make_solution(u_new, pt, rs, it, tol))
        if np.sign(tan_new[1]) != np.sign(tan[1]) and tan[1] != 0:
            branch.folds.append(len(branch.points) - 1)
        branch.tangents.append(tan_new)
        u, t, tan = u_new, t_new, tan_new
        h = min(2.0 * h, ds) if it <= 4 else h
        if t_bounds is not None and not (t_bounds[0] <= t <= t_bounds[1]):
            branch.stop_reason = "left parameter window"
            break
    else:
        branch.stop_reason = "max_steps"
    return branch


def locate_fold(branch, which=0, tol=DEFAULT_TOL, fold_tol=FOLD_TOL, max_iter=100):
    """Refine the fold between two branch points by Illinois secant on the
    t-component of the tangent, parametrized by arclength along the earlier tangent."""
    if not branch.folds:
        raise NoFoldInBranch("no tangent sign change recorded on this branch")
    p = branch.problem
    i = branch.folds[which]
    u0, t0 = branch.points[i - 1].u.values, float(branch.points[i - 1].t)
    tan0 = branch.tangents[i - 1]
    n = u0.size
    w = _weight(n)
    u1, t1 = branch.points[i].u.values, float(branch.points[i].t)

    def point(sigma):
        if sigma == 0.0:
            return u0, t0, tan0
        u, t, _ = _corrector(u0, t0, tan0, sigma, p, tol, 50, POSITIVITY_FLOOR)
        return u, t, _tangent(u, t, p, tan0)

    a, fa = 0.0, tan0[1]
    b = w * tan0[0] @ (u1 - u0) + tan0[1] * (t1 - t0)
    ub, tb, tanb = point(b)
    fb = tanb[1]
    best = (u0, t0, fa) if abs(fa) < abs(fb) else (ub, tb, fb)
    side = 0
    for _ in range(max_iter):
        if abs(best[2]) <= fold_tol:
            break
        c = (a * fb - b * fa) / (fb - fa)
        uc, tc, tanc = point(c)
        fc = tanc[1]
        if abs(fc) < abs(best[2]):
            best = (uc, tc, fc)
        if fc * fb < 0:
            a, fa = b, fb
            side = 0
        else:
            fa = fa * 0.5 if side == 1 else fa
            side = 1
        b, fb = c, fc
    else:
        raise NoFoldInBranch(f"fold refinement did not reach |dt| <= {fold_tol}")
    u_f, t_f, f_f = best
    return {"t1": t_f, "u_fold": SpectralField(p.grid, u_f), "tangent_dt": f_f}


# ---------------------------------------------------------------------------
# attractive-repulsive homotopy

def scalar_equilibrium(p):
    """Smallest positive root of ``γ̄/a^μ - β̄/a^ρ - ē``."""
    kind, _ = _ar_kind(p)
    roots = phi_roots(kind)
    if not roots:
        raise NoBracket("the mean equilibrium function has no sign change on [1e-6, 1e6]")
    a = roots[0]
    if abs(float(phi_mean(kind, a))) > 1e-12:
        lo, hi = a * (1 - 1e-9), a * (1 + 1e-9)
        a = brentq(lambda v: float(phi_mean(kind, v)), lo, hi, xtol=1e-16, rtol=1e-15)
    return float(a)


def _homotopy_system(p, lam):
    n = p.grid.n
    lin = linear_matrix(p.grid, p.s, p.c)

    def res(u):
        nl = nonlinearity(u, p)
        return apply_linear_values(u, p) + (1 - lam) * np.mean(nl) + lam * nl

    def jac(u):
        d = nonlinearity_derivative(u, p)
        return lin + lam * np.diag(d) + (1 - lam) / n * np.outer(np.ones(n), d)

    return res, jac


def mawhin_homotopy(p, lambda_steps=20, tol=DEFAULT_TOL, max_iter=50, dlam_min=1e-4,
                    min_u_floor=POSITIVITY_FLOOR):
    """Deform the mean-projected problem (constant solution ``ã``) into the full one."""
    if not isinstance(p.kind, AttractiveRepulsive):
        raise PreconditionError("the homotopy is defined for the attractive-repulsive family")
    a = scalar_equilibrium(p)
    admissible = lambda v: np.min(v) > min_u_floor
    u = np.full(p.grid.n, a)
    res0, jac0 = _homotopy_system(p, 0.0)
    u, _, _ = damped_newton(u, res0, jac0, tol, max_iter, admissible=admissible)
    path = [HomotopyState(0.0, SpectralField(p.grid, u), a)]
    lam, nominal = 0.0, 1.0 / lambda_steps
    dlam = nominal
    total = 0
    while lam < 1.0:
        nxt = min(1.0, lam + dlam)
        res, jac = _homotopy_system(p, nxt)
        try:
            u_new, _, it = damped_newton(u, res, jac, tol, max_iter, admissible=admissible)
        except (SolverError, FloatingPointError):
            dlam *= 0.5
            if dlam < dlam_min:
                raise HomotopyStall(f"homotopy stalled at lambda={lam:.6g}") from None
            continue
        lam, u = nxt, u_new
        total += it
        path.append(HomotopyState(lam, SpectralField(p.grid, u), a))
        dlam = min(2.0 * dlam, nominal)
    rs = float(np.max(np.abs(residual_values(u, p))))
    return make_solution(u, p, rs, total, tol, a_start=a,
                         start_error=float(np.max(np.abs(path[0].u.values - a))),
                         lambdas=[st.lam for st in path], path=path)
