"""Closed-form a-priori constants and their checks against computed solutions."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    DriftRequired,
    InvalidBeta,
    MissingCertificate,
    PreconditionError,
    RootBracketFailed,
    WindowGrowthExceeded,
)
from .fractional import apply_derivative, apply_fractional
from .nonlinear import AttractiveRepulsive, SingularMems, Smooth, nonlinearity
from .spectral import TWO_PI, hs_seminorm, inner, norms

WINDOW_DOUBLINGS = 60
SCAN_POINTS = 4001


@dataclass
class CertificateReport:
    family: str
    theta: Optional[float] = None
    t_star: Optional[float] = None
    t1_numeric: Optional[float] = None
    M_sup_bound: Optional[float] = None
    r_t: Optional[float] = None
    A0: Optional[float] = None
    A1: Optional[float] = None
    M1: Optional[float] = None
    M2: Optional[float] = None
    drift_constant: Optional[float] = None
    identity_residuals: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        out = {"family": self.family}
        for key in ("theta", "t_star", "t1_numeric", "M_sup_bound", "r_t", "A0", "A1", "M1", "M2", "drift_constant"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        out.update({f"identity.{k}": v for k, v in self.identity_residuals.items()})
        out.update({f"flag.{k}": v for k, v in self.flags.items()})
        out.update(self.extras)
        return out


def _g_values(kind, z):
    return np.broadcast_to(np.asarray(kind.g(z), dtype=float), np.shape(z))


def _smooth(p):
    if not isinstance(p.kind, Smooth):
        raise PreconditionError("this certificate applies to the smooth family only")
    return p.kind


# ---------------------------------------------------------------------------
# smooth family

def theta_smooth(p, z_window_init=1.0):
    """``min_z g(z) - max_x h(x)``, the nonexistence threshold.

    The z-window doubles until both ends exceed the interior grid minimum by 1,
    then the grid minimizer is polished by bounded golden-section search.
    """
    kind = _smooth(p)
    hmax = float(np.max(p.forcing()))
    w = float(z_window_init)
    for _ in range(WINDOW_DOUBLINGS):
        z = np.linspace(-w, w, SCAN_POINTS)
        gz = _g_values(kind, z)
        i = int(np.argmin(gz))
        if 0 < i < len(z) - 1 and min(gz[0], gz[-1]) > gz[i] + 1.0:
            break
        w *= 2.0
    else:
        raise WindowGrowthExceeded("g does not grow at both ends; is it coercive?")
    res = minimize_scalar(lambda v: float(kind.g(v)), bounds=(z[i - 1], z[i + 1]), method="bounded",
                          options={"xatol": 1e-10})
    gmin = min(float(res.fun), float(gz[i]))
    return gmin - hmax


def t_star_smooth(p):
    """``max_x (g(0) - h(x))``; ``u ≡ 0`` is a supersolution for every larger t."""
    kind = _smooth(p)
    return float(np.max(float(kind.g(0.0)) - p.forcing()))


def coercive_radius(p, t2, tol=1e-7):
    """Smallest R (to ``tol``) with ``g(z) > t2 + max h`` for all ``|z| >= R``."""
    kind = _smooth(p)
    target = float(t2) + float(np.max(p.forcing()))

    # outer window: g exceeds the target on the whole shell W <= |z| <= 2W
    w = 1.0
    for _ in range(WINDOW_DOUBLINGS):
        shell = np.concatenate([np.linspace(w, 2 * w, 513), -np.linspace(w, 2 * w, 513)])
        if np.min(_g_values(kind, shell)) > target:
            break
        w *= 2.0
    else:
        raise WindowGrowthExceeded("g never exceeds the target level; is it coercive?")
    zz = np.linspace(0.0, 2 * w, 200001)
    gp, gm = _g_values(kind, zz), _g_values(kind, -zz)
    tail_min = np.minimum(np.minimum.accumulate(gp[::-1])[::-1], np.minimum.accumulate(gm[::-1])[::-1])

    def ok(r):
        j = np.searchsorted(zz, r)
        rest = tail_min[j] if j < len(zz) else np.inf
        return min(float(kind.g(r)), float(kind.g(-r)), rest) > target

    if ok(0.0):
        return 0.0
    lo, hi = 0.0, w
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def sup_bound_M(p, t2):
    """``R + sqrt(2π) ||h||_{L2} / c``: sup-norm bound for solutions with ``t <= t2``."""
    if not p.c > 0:
        raise DriftRequired("the sup bound needs a positive drift c")
    hl2 = norms(p.h)["l2"] if p.h is not None else 0.0
    return coercive_radius(p, t2) + np.sqrt(TWO_PI) * hl2 / p.c


# ---------------------------------------------------------------------------
# singular families

def singular_constants(mu, beta, t=None):
    """Threshold, fold bound and positive floor for ``u + β/u^μ = t``."""
    b = np.asarray(getattr(beta, "values", beta), dtype=float)
    bmin, bmax = float(b.min()), float(b.max())
    if bmin <= 0:
        raise InvalidBeta("beta must be strictly positive")
    out = {
        "theta": (mu * bmin) ** (1.0 / (mu + 1.0)),
        "t_star": (mu + 1.0) * (bmax / mu ** mu) ** (1.0 / (mu + 1.0)),
    }
    if t is not None:
        if not t > 0:
            raise PreconditionError(f"r_t needs t > 0, got {t}")
        out["r_t"] = (bmin / t) ** (1.0 / mu)
    return out


def _parts(field_):
    v = field_.values
    return float(v.mean()), float(np.maximum(v, 0).mean()), float(np.maximum(-v, 0).mean())


def ar_means(kind):
    g, gp, gm = _parts(kind.gamma)
    b, bp, bm = _parts(kind.beta)
    e, ep, em = _parts(kind.e)
    return {"gamma": g, "gamma_plus": gp, "gamma_minus": gm, "beta": b, "beta_plus": bp,
            "beta_minus": bm, "e": e, "e_plus": ep, "e_minus": em}


def phi_mean(kind, x):
    m = ar_means(kind)
    x = np.asarray(x, dtype=float)
    return m["gamma"] / x ** kind.mu - m["beta"] / x ** kind.rho - m["e"]


def phi_roots(kind, lo=1e-6, hi=1e6, points=20001):
    """Every sign change of the mean equilibrium function on a log grid, refined by brentq."""
    xs = np.logspace(np.log10(lo), np.log10(hi), points)
    with np.errstate(all="ignore"):
        ph = phi_mean(kind, xs)
    roots = []
    for i in range(points - 1):
        if ph[i] == 0.0:
            roots.append(float(xs[i]))
        elif ph[i] * ph[i + 1] < 0:
            roots.append(brentq(lambda v: float(phi_mean(kind, v)), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15))
    return roots


def _ar_kind(p):
    kind = getattr(p, "kind", p)
    if not isinstance(kind, AttractiveRepulsive):
        raise PreconditionError("this certificate applies to the attractive-repulsive family only")
    m = ar_means(kind)
    if not (m["gamma"] > 0 and m["e"] > 0):
        raise PreconditionError("need mean(gamma) > 0 and mean(e) > 0")
    return kind, m


def ar_constants(p, r_run=None, R_run=None):
    """Nodal bounds A0/A1 and the equilibrium roots M1 <= M2."""
    kind, m = _ar_kind(p)
    mu, rho = kind.mu, kind.rho
    a0 = max(1.0, ((m["gamma_plus"] + m["beta_minus"]) / m["e"]) ** (1.0 / rho))
    if m["beta_plus"] == 0:
        a1 = (m["gamma"] / m["e_plus"]) ** (1.0 / mu)
    elif mu == rho:
        # equal exponents: the weighted mean gives u^mu >= (γ̄ - β̄₊)/ē₊ directly
        gap = m["gamma"] - m["beta_plus"]
        a1 = (gap / m["e_plus"]) ** (1.0 / mu) if gap > 0 else 0.0
    else:
        a1 = min((m["gamma"] / (2 * m["e_plus"])) ** (1.0 / mu),
                 (m["gamma"] / (2 * m["beta_plus"])) ** (1.0 / (mu - rho)))
    roots = phi_roots(kind)
    if not roots:
        raise RootBracketFailed("phi has no sign change on [1e-6, 1e6]")
    m1, m2 = roots[0], roots[-1]
    out = {"A0": a0, "A1": a1, "M1": m1, "M2": m2, "degenerate": len(roots) == 1 or m1 == m2}
    out["r0"] = m1 if r_run is None else min(m1, r_run)
    out["R0"] = m2 if R_run is None else max(m2, R_run)
    return out


def lim_condition_probe(p, c=None):
    """Trend of ``cx/2 - 2π γ̄₋/x^μ - 2π β̄₊/x^ρ`` as ``x -> 0+``; advisory only."""
    kind = getattr(p, "kind", p)
    c = getattr(p, "c", 0.0) if c is None else c
    m = ar_means(kind)
    xs = np.logspace(-8, 2, 201)
    vals = c * xs / 2 - TWO_PI * m["gamma_minus"] / xs ** kind.mu - TWO_PI * m["beta_plus"] / xs ** kind.rho
    head = vals[:20]
    if np.all(np.abs(head) < 1e-6):
        trend = "finite (→0)"
    elif np.all(np.diff(head) > 0) and head[0] < -1e6:
        trend = "−∞"
    elif head[0] > 1e6:
        trend = "+∞"
    else:
        trend = "finite"
    return {"trend": trend, "x": xs, "values": vals, "satisfied": trend == "+∞"}


# ---------------------------------------------------------------------------
# identities and bounds

def verify_identities(sol, p, theta=None):
    """Integral identities every solution must satisfy, as nonnegative residuals."""
    u = sol.u
    du = apply_derivative(u).values
    lap = apply_fractional(u, p.s).values
    nl = nonlinearity(u.values, p)
    kind = p.kind
    out = {}
    if isinstance(kind, AttractiveRepulsive):
        out["mean_value"] = abs(float(np.mean(nl)))
        drive = -nl
    elif isinstance(kind, SingularMems):
        out["mean_value"] = abs(float(np.mean(nl)) - p.t)
        drive = -kind.beta.values / u.values ** kind.mu
    else:
        out["mean_value"] = abs(float(np.mean(nl)) - (p.t + float(np.mean(p.forcing()))))
        drive = p.forcing()
    if p.c > 0:
        out["drift_energy"] = abs(p.c * inner(du, du) - inner(drive, du))
    out["mean_fractional"] = abs(float(np.mean(lap)))
    out["fractional_drift"] = abs(inner(lap, du))
    if isinstance(kind, Smooth) and p.c == 0:
        if theta is None:
            try:
                theta = theta_smooth(p)
            except WindowGrowthExceeded:
                return out
        v = u - float(np.mean(u.values))
        out["zero_mean_slack"] = max(0.0, hs_seminorm(v, p.s) ** 2 - TWO_PI * (p.t - theta) * float(np.max(np.abs(v.values))))
    return out


def verify_bounds(sol, report, p, slack=1e-10):
    """Compare a solution with the constants in ``report``; returns name -> (pass, margin)."""
    u = sol.u.values
    kind = p.kind
    flags = {}
    if isinstance(kind, Smooth):
        if p.c > 0:
            if report.M_sup_bound is None:
                raise MissingCertificate("M_sup_bound is required for the smooth family with drift")
            margin = report.M_sup_bound - float(np.max(np.abs(u)))
            flags["sup_below_M"] = (margin > 0, margin)
    elif isinstance(kind, SingularMems):
        if report.r_t is None:
            raise MissingCertificate("r_t is required for the singular family")
        margin = float(u.min()) - report.r_t
        flags["min_above_r_t"] = (margin > 0, margin)
        if p.c > 0:
            bound = (norms(kind.beta)["l2"] + p.t * np.sqrt(TWO_PI)) / p.c
            margin = bound - norms(sol.u)["l2_deriv"]
            flags["derivative_bound"] = (margin >= 0, margin)
    else:
        if report.A0 is None or report.A1 is None:
            raise MissingCertificate("A0 and A1 are required for the attractive-repulsive family")
        m0 = report.A0 + slack - float(u.min())
        m1 = float(u.max()) - (report.A1 - slack)
        flags["min_below_A0"] = (m0 >= 0, m0)
        flags["max_above_A1"] = (m1 >= 0, m1)
    return flags


def certify(p, t2=None):
    """Evaluate every constant available for the problem family."""
    kind = p.kind
    if isinstance(kind, Smooth):
        rep = CertificateReport(family="smooth")
        rep.t_star = t_star_smooth(p)
        if p.c > 0:
            rep.drift_constant = 1.0 / p.c
        try:
            rep.theta = theta_smooth(p)
        except WindowGrowthExceeded:
            # g is not coercive: no threshold and no sup bound exist
            rep.extras["coercive"] = False
            return rep
        rep.extras["coercive"] = True
        if p.c > 0:
            rep.M_sup_bound = sup_bound_M(p, p.t if t2 is None else t2)
        rep.flags["infeasible"] = bool(p.t < rep.theta)
    elif isinstance(kind, SingularMems):
        rep = CertificateReport(family="mems")
        const = singular_constants(kind.mu, kind.beta, p.t if p.t > 0 else None)
        rep.theta, rep.t_star, rep.r_t = const["theta"], const["t_star"], const.get("r_t")
        if p.c > 0:
            rep.drift_constant = 1.0 / p.c
        rep.flags["infeasible"] = bool(p.t < rep.theta)
    else:
        rep = CertificateReport(family="attractive_repulsive")
        const = ar_constants(p)
        rep.A0, rep.A1, rep.M1, rep.M2 = const["A0"], const["A1"], const["M1"], const["M2"]
        rep.extras["degenerate_bracket"] = const["degenerate"]
        rep.extras["lim_trend"] = lim_condition_probe(p)["trend"]
    return rep
