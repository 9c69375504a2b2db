"""Periodic grids, trigonometric transforms, and the norms used by the estimates.

Fourier coefficients follow the convention ``u(x) = sum_k c_k exp(i k x)`` with
wavenumbers stored in the centred order ``k = -n/2, ..., n/2 - 1``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidGrid, InvalidOrder, SampleError
from .expr import Expression

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PeriodicGrid:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise InvalidGrid(f"node count must be an integer, got {self.n!r}")
        if self.n < 8 or self.n % 2:
            raise InvalidGrid(f"node count must be even and >= 8, got {self.n}")

    @cached_property
    def nodes(self):
        return TWO_PI * np.arange(self.n) / self.n

    @property
    def spacing(self):
        return TWO_PI / self.n

    @cached_property
    def wavenumbers(self):
        """Centred wavenumbers ``-n/2 .. n/2-1``."""
        return np.arange(-self.n // 2, self.n // 2)


def make_grid(n):
    return PeriodicGrid(n)


class SpectralField:
    """A real 2π-periodic function held by its nodal values.

    Coefficients are computed on first access and cached; the nodal values are
    read-only so the cache never goes stale.
    """

    def __init__(self, grid, values):
        values = np.array(values, dtype=float)
        if values.ndim == 0:
            values = np.full(grid.n, float(values))
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} nodal values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise SampleError("field values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def from_coeffs(cls, grid, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        vals = np.fft.ifft(np.fft.ifftshift(coeffs)) * grid.n
        return cls(grid, vals.real)

    @cached_property
    def coeffs(self):
        c = np.fft.fftshift(np.fft.fft(self.values)) / self.grid.n
        c.setflags(write=False)
        return c

    @property
    def n(self):
        return self.grid.n

    def __add__(self, other):
        return SpectralField(self.grid, self.values + _vals(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SpectralField(self.grid, self.values - _vals(other))

    def __rsub__(self, other):
        return SpectralField(self.grid, _vals(other) - self.values)

    def __mul__(self, other):
        return SpectralField(self.grid, self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.values)

    def __repr__(self):
        return f"SpectralField(n={self.n}, min={self.values.min():.6g}, max={self.values.max():.6g})"


def _vals(other):
    return other.values if isinstance(other, SpectralField) else other


def sample(expr, grid):
    """Evaluate ``expr`` (callable of x, expression string, or number) at the nodes."""
    if isinstance(expr, str):
        expr = Expression(expr, ("x",))
    with np.errstate(all="ignore"):
        if callable(expr):
            try:
                vals = expr(grid.nodes)
            except (ZeroDivisionError, OverflowError, ValueError) as exc:
                raise SampleError(f"evaluation failed: {exc}") from None
        else:
            vals = expr
        vals = np.broadcast_to(np.asarray(vals, dtype=float), (grid.n,)).copy()
    if not np.all(np.isfinite(vals)):
        bad = grid.nodes[~np.isfinite(vals)]
        raise SampleError(f"non-finite value at x={bad[0]:.6g}")
    return SpectralField(grid, vals)


def mean(field):
    return float(np.mean(field.values))


def inner(a, b):
    """Nodal trapezoid approximation of the L2(0, 2π) inner product."""
    return float(TWO_PI * np.mean(_vals(a) * _vals(b)))


def norms(field):
    c = field.coeffs
    k = field.grid.wavenumbers
    p = np.abs(c) ** 2
    return {
        "sup": float(np.max(np.abs(field.values))),
        "l2": float(np.sqrt(TWO_PI * p.sum())),
        "l2_deriv": float(np.sqrt(TWO_PI * (k.astype(float) ** 2 * p).sum())),
    }


def check_order(s):
    if not (0.0 < s < 1.0):
        raise InvalidOrder(f"order s must lie in (0, 1), got {s}")


def hs_seminorm(field, s):
    check_order(s)
    k = np.abs(field.grid.wavenumbers).astype(float)
    return float(np.sqrt(TWO_PI * (k ** (2 * s) * np.abs(field.coeffs) ** 2).sum()))


def periodic_distance(x, y):
    d = np.abs(x - y) % TWO_PI
    return np.minimum(d, TWO_PI - d)


def holder_quotient(field, alpha):
    """Largest nodal difference quotient ``|u_i - u_j| / d(x_i, x_j)**alpha``.

    A grid diagnostic for Hölder continuity, not a bound on the true seminorm.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    u = field.values
    x = field.grid.nodes
    du = np.abs(u[:, None] - u[None, :])
    d = periodic_distance(x[:, None], x[None, :])
    np.fill_diagonal(d, 1.0)
    q = du / d ** alpha
    np.fill_diagonal(q, 0.0)
    return float(q.max())
