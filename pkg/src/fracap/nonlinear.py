"""Problem families, residuals, Jacobians, and the nonlinear solvers.

Every family is written as ``L u + N(x, u) = rhs`` with ``L = (Δ)^s + c d/dx``:

* ``Smooth``:              ``N = g(u)``,                    ``rhs = t + h``
* ``SingularMems``:        ``N = u + β / u^μ``,              ``rhs = t``
* ``AttractiveRepulsive``: ``N = e - γ / u^μ + β / u^ρ``,   ``rhs = 0``
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .errors import (
    InvalidBeta,
    InvalidPair,
    MaxIterExceeded,
    NoConvergence,
    PositivityViolated,
    PreconditionError,
    SingularJacobian,
    SolverError,
)
from .expr import complex_step_derivative
from .fractional import linear_matrix, linear_symbol
from .spectral import TWO_PI, PeriodicGrid, SpectralField, check_order, norms

DEFAULT_TOL = 1e-10
POSITIVITY_FLOOR = 1e-8
MAX_HALVINGS = 30


@dataclass(frozen=True)
class Smooth:
    g: Callable
    dg: Optional[Callable] = None
    coercive: bool = True

    def derivative(self, u):
        if self.dg is not None:
            return np.broadcast_to(np.asarray(self.dg(u), dtype=float), np.shape(u))
        return complex_step_derivative(self.g)(u)


@dataclass(frozen=True)
class SingularMems:
    mu: float
    beta: SpectralField


@dataclass(frozen=True)
class AttractiveRepulsive:
    mu: float
    rho: float
    gamma: SpectralField
    beta: SpectralField
    e: SpectralField


Kind = Union[Smooth, SingularMems, AttractiveRepulsive]


@dataclass(frozen=True)
class ProblemSpec:
    grid: PeriodicGrid
    s: float
    c: float
    kind: Kind
    t: Optional[float] = None
    h: Optional[SpectralField] = None

    def __post_init__(self):
        check_order(self.s)
        if self.c < 0:
            raise PreconditionError(f"drift c must be >= 0, got {self.c}")
        k = self.kind
        if isinstance(k, SingularMems):
            if k.mu < 1:
                raise PreconditionError(f"mu must be >= 1, got {k.mu}")
            if k.beta.values.min() <= 0:
                raise InvalidBeta("beta must be strictly positive at every node")
        elif isinstance(k, AttractiveRepulsive):
            if not (k.mu >= k.rho > 0 and k.mu >= 1):
                raise PreconditionError(f"need mu >= rho > 0 and mu >= 1, got mu={k.mu}, rho={k.rho}")
        if not isinstance(k, AttractiveRepulsive) and self.t is None:
            raise PreconditionError("parameter t is required for this family")
        if self.h is not None and self.h.n != self.grid.n:
            raise PreconditionError("forcing h lives on a different grid")

    @property
    def singular(self):
        return not isinstance(self.kind, Smooth)

    @property
    def has_parameter(self):
        return not isinstance(self.kind, AttractiveRepulsive)

    def with_t(self, t):
        return replace(self, t=float(t))

    def forcing(self):
        return self.h.values if self.h is not None else np.zeros(self.grid.n)


# ---------------------------------------------------------------------------
# residual and Jacobian on raw nodal arrays

@lru_cache(maxsize=64)
def _fft_symbol(n, s, c):
    sym = np.fft.ifftshift(linear_symbol(PeriodicGrid(n), s, c))
    sym.setflags(write=False)
    return sym


def apply_linear_values(u, p):
    sym = _fft_symbol(p.grid.n, float(p.s), float(p.c))
    return np.fft.ifft(sym * np.fft.fft(u)).real


def _check_positive(u, p):
    if p.singular and np.min(u) <= 0:
        raise PositivityViolated(f"singular nonlinearity needs u > 0, min u = {np.min(u):.3g}")


def nonlinearity(u, p):
    k = p.kind
    if isinstance(k, Smooth):
        return np.broadcast_to(np.asarray(k.g(u), dtype=float), u.shape)
    _check_positive(u, p)
    if isinstance(k, SingularMems):
        return u + k.beta.values / u ** k.mu
    return k.e.values - k.gamma.values / u ** k.mu + k.beta.values / u ** k.rho


def nonlinearity_derivative(u, p):
    k = p.kind
    if isinstance(k, Smooth):
        return k.derivative(u)
    _check_positive(u, p)
    if isinstance(k, SingularMems):
        return 1.0 - k.mu * k.beta.values / u ** (k.mu + 1)
    return k.mu * k.gamma.values / u ** (k.mu + 1) - k.rho * k.beta.values / u ** (k.rho + 1)


def rhs(p):
    if isinstance(p.kind, Smooth):
        return p.t + p.forcing()
    if isinstance(p.kind, SingularMems):
        return np.full(p.grid.n, float(p.t))
    return np.zeros(p.grid.n)


def residual_values(u, p):
    return apply_linear_values(u, p) + nonlinearity(u, p) - rhs(p)


def jacobian_values(u, p):
    return linear_matrix(p.grid, p.s, p.c) + np.diag(nonlinearity_derivative(u, p))


def residual(u, p):
    """Nodal residual of the problem at ``u``."""
    return SpectralField(p.grid, residual_values(u.values, p))


def jacobian(u, p):
    """Dense n×n Jacobian of :func:`residual` at ``u``."""
    return jacobian_values(u.values, p)


# ---------------------------------------------------------------------------
# damped Newton core

def _sup(r):
    return float(np.max(np.abs(r)))


def damped_newton(x0, res, jac, tol, max_iter, admissible=None, merit=None, step_scale=None):
    """Backtracking Newton on the sup norm.

    ``res``/``jac`` act on flat arrays.  ``merit`` (defaults to ``res``) drives
    the line search while convergence is always judged on ``res``.
    Returns ``(x, residual_sup, iterations)``.
    """
    merit = merit or (lambda x, r: r)
    x = np.array(x0, dtype=float)
    r = res(x)
    best = _sup(r)
    for it in range(max_iter + 1):
        rs = _sup(r)
        if rs <= tol:
            return x, rs, it
        if it == max_iter:
            break
        with np.errstate(all="ignore"):
            try:
                dx = np.linalg.solve(jac(x), -r)
            except np.linalg.LinAlgError:
                raise SingularJacobian(f"Jacobian is singular at iteration {it}") from None
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian(f"non-finite Newton step at iteration {it}")
        if step_scale is not None:
            dx = step_scale(x, dx)
        m0 = _sup(merit(x, r))
        lam = 1.0
        saw_admissible = False
        for _ in range(MAX_HALVINGS + 1):
            xt = x + lam * dx
            if admissible is None or admissible(xt):
                saw_admissible = True
                with np.errstate(all="ignore"):
                    rt = res(xt)
                    mt = _sup(merit(xt, rt))
                if np.isfinite(mt) and mt < (1.0 - 1e-4 * lam) * m0:
                    break
            lam *= 0.5
        else:
            if not saw_admissible:
                raise PositivityViolated(f"no step keeps the iterate admissible (iteration {it})")
            raise MaxIterExceeded(f"line search stalled at residual {rs:.3e} (iteration {it})")
        x, r = xt, rt
        best = min(best, _sup(r))
    raise MaxIterExceeded(f"no convergence in {max_iter} iterations (best residual {best:.3e})")


def _positivity(p, floor):
    if not p.singular:
        return None
    return lambda u: np.min(u) > floor


@dataclass
class Solution:
    u: SpectralField
    t: Optional[float]
    residual_sup: float
    iterations: int
    tol: float
    diagnostics: dict = field(default_factory=dict)


def make_solution(u, p, res_sup, iterations, tol, **extra):
    u = u if isinstance(u, SpectralField) else SpectralField(p.grid, u)
    diag = {
        "mean": float(np.mean(u.values)),
        "min": float(np.min(u.values)),
        "max": float(np.max(u.values)),
        "l2_deriv": norms(u)["l2_deriv"],
    }
    diag.update(extra)
    return Solution(u=u, t=p.t, residual_sup=float(res_sup), iterations=int(iterations), tol=float(tol), diagnostics=diag)


def newton_solve(u0, p, tol=DEFAULT_TOL, max_iter=50, min_u_floor=POSITIVITY_FLOOR):
    u0 = np.asarray(getattr(u0, "values", u0), dtype=float)
    if p.singular and np.min(u0) <= min_u_floor:
        raise PositivityViolated(f"initial guess must stay above {min_u_floor}")
    x, rs, it = damped_newton(
        u0,
        lambda u: residual_values(u, p),
        lambda u: jacobian_values(u, p),
        tol,
        max_iter,
        admissible=_positivity(p, min_u_floor),
    )
    return make_solution(x, p, rs, it, tol)


# ---------------------------------------------------------------------------
# deflation

def random_seeds(grid, count, seed=0, center=0.0, amplitude=1.0, degree=3):
    """Deterministic random trigonometric polynomials used as Newton seeds."""
    rng = np.random.default_rng(seed)
    x = grid.nodes
    out = []
    for _ in range(count):
        vals = center + amplitude * rng.uniform(-1.0, 1.0)
        for k in range(1, degree + 1):
            a, b = rng.uniform(-1.0, 1.0, size=2) * amplitude / (2 * k)
            vals = vals + a * np.cos(k * x) + b * np.sin(k * x)
        out.append(SpectralField(grid, vals))
    return out


def _deflation(found, n, shift):
    w = TWO_PI / n

    def factors(u):
        d = [w * np.sum((u - r) ** 2) for r in found]
        return d, [1.0 / di + shift for di in d]

    def merit(u, r):
        _, m = factors(u)
        return np.prod(m) * r

    def step_scale(u, du):
        d, m = factors(u)
        acc = 0.0
        for r, di, mi in zip(found, d, m):
            grad = -2.0 * w * (u - r) / di ** 2
            acc += grad @ du / mi
        denom = 1.0 - acc
        if not np.isfinite(denom) or abs(denom) < 1e-12:
            return du
        return du / denom

    return merit, step_scale


def deflated_search(p, seeds, tol=DEFAULT_TOL, max_iter=50, deflation_radius=1e-4,
                    min_u_floor=POSITIVITY_FLOOR, shift=1.0):
    """Run deflated Newton from each seed in order, collecting distinct solutions."""
    found = []
    for seed in seeds:
        u0 = np.asarray(getattr(seed, "values", seed), dtype=float)
        if p.singular and np.min(u0) <= min_u_floor:
            continue
        roots = [sol.u.values for sol in found]
        merit, scale = _deflation(roots, p.grid.n, shift) if roots else (None, None)
        try:
            x, _, _ = damped_newton(
                u0,
                lambda u: residual_values(u, p),
                lambda u: jacobian_values(u, p),
                tol,
                max_iter,
                admissible=_positivity(p, min_u_floor),
                merit=merit,
                step_scale=scale,
            )
            sol = newton_solve(x, p, tol=tol, max_iter=max_iter, min_u_floor=min_u_floor)
        except SolverError:
            continue
        if all(_sup(sol.u.values - other.u.values) > deflation_radius for other in found):
            found.append(sol)
    return found


# ---------------------------------------------------------------------------
# sub/supersolutions and the truncated fixed point

@dataclass
class MarginReport:
    side: str
    margins: np.ndarray
    min_margin: float
    ok: bool


def check_sub_super(u, p, side, tol=DEFAULT_TOL):
    """Classical nodal check of a sub- (``residual >= 0``) or super- (``<= 0``) solution."""
    if side not in ("sub", "super"):
        raise ValueError(f"side must be 'sub' or 'super', got {side!r}")
    r = residual_values(u.values, p)
    margins = r if side == "sub" else -r
    mn = float(margins.min())
    return MarginReport(side=side, margins=margins, min_margin=mn, ok=mn >= -tol)


@dataclass
class SubSuperPair:
    eta: SpectralField
    upper: SpectralField
    sub_min: float
    super_min: float


def make_pair(eta, upper, p, tol=DEFAULT_TOL):
    if np.any(eta.values > upper.values):
        raise InvalidPair("subsolution exceeds supersolution somewhere")
    sub = check_sub_super(eta, p, "sub", tol)
    sup = check_sub_super(upper, p, "super", tol)
    return SubSuperPair(eta=eta, upper=upper, sub_min=sub.min_margin, super_min=sup.min_margin)


def truncated_fixed_point(p, pair, tol=DEFAULT_TOL, sigma=1.0, max_picard=200, max_iter=50):
    """Solve between an ordered sub/supersolution pair via the truncated map.

    Iterates ``u <- K F(u)`` where ``K`` inverts ``(Δ)^s + c d/dx - sigma`` and
    ``F(u) = -sigma w + rhs - N(x, w)`` with ``w`` the nodal clamp of ``u``
    into ``[eta, upper]``.  Falls back to Newton on the truncated equation
    when the iteration stagnates.
    """
    lo, hi = pair.eta.values, pair.upper.values
    if np.any(lo > hi):
        raise InvalidPair("subsolution exceeds supersolution somewhere")
    if pair.sub_min < -tol or pair.super_min < -tol:
        raise InvalidPair(f"pair margins must be nonnegative (sub {pair.sub_min:.3g}, super {pair.super_min:.3g})")
    f_rhs = rhs(p)
    sym = _fft_symbol(p.grid.n, float(p.s), float(p.c)) - sigma

    def truncated_map(u):
        w = np.clip(u, lo, hi)
        return -sigma * w + f_rhs - nonlinearity(w, p)

    u = 0.5 * (lo + hi)
    picard_steps = 0
    history = []
    converged = False
    for picard_steps in range(1, max_picard + 1):
        u_new = np.fft.ifft(np.fft.fft(truncated_map(u)) / sym).real
        inc = _sup(u_new - u)
        u = u_new
        history.append(inc)
        if inc <= 0.1 * tol:
            converged = True
            break
        if len(history) > 20 and inc > 0.95 * history[-11]:
            break

    newton_steps = 0
    if not converged or _sup(residual_values(u, p)) > tol:
        def tres(v):
            return apply_linear_values(v, p) - sigma * v - truncated_map(v)

        def tjac(v):
            inside = (v >= lo) & (v <= hi)
            dF = np.where(inside, -sigma - nonlinearity_derivative(np.clip(v, lo, hi), p), 0.0)
            return linear_matrix(p.grid, p.s, p.c) - sigma * np.eye(p.grid.n) - np.diag(dF)

        try:
            u, _, newton_steps = damped_newton(u, tres, tjac, tol, max_iter)
        except SolverError as exc:
            raise NoConvergence(f"truncated problem did not converge: {exc}") from None

    rs = _sup(residual_values(u, p))
    if rs > tol or np.any(u < lo - tol) or np.any(u > hi + tol):
        raise NoConvergence(f"truncation active at the computed point (residual {rs:.3e})")
    return make_solution(u, p, rs, picard_steps + newton_steps, tol,
                         picard_steps=picard_steps, newton_steps=newton_steps)
