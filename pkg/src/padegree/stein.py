"""Stein operator for K_s, the solution of its Stein equation, and bound checks.

The operator is

    A f(x) = s f''(x) - x f'(x) - 2(s - 1) f(x),

and E A f(Z) = 0 for Z ~ K_s and every smooth f with f(0) = f'(0) = 0.
For a target h the equation A f = h - E h(Z) is solved by

    f(x) = V_s(x) * int_0^x g(y) / V_s(y) dy,
    g(y) = (1 / (s kappa_s(y))) * int_0^y (h - E h) kappa_s,

with V_s(x) = U(s - 1, 1/2, x^2 / (2s)).  Both cumulative integrals are
carried by piecewise Chebyshev interpolants, so f, f' and g can be
evaluated anywhere on the solution interval without nested quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from scipy import integrate, special as sps

from .errors import ConvergenceError, DomainError, UnsupportedParametersError
from .ks import KsDist
from .special import DEFAULT_QUAD, QuadratureConfig, kummer_u, log_kummer_u, sqrt_s_gamma_ratio

__all__ = [
    "TestFunction",
    "SteinSolution",
    "BoundCheck",
    "stein_apply",
    "stein_expectation",
    "stein_solve",
    "log_density_ratio_d",
    "gaussian_mills_ratio",
    "smoothed_indicator",
    "check_bounds",
]

Func = Callable[[float], float]


@dataclass(frozen=True)
class TestFunction:
    """A twice differentiable f with f(0) = f'(0) = 0, given with its derivatives."""

    __test__ = False  # not a pytest class

    f: Func
    df: Func
    d2f: Func
    tol: float = 1e-12

    def __post_init__(self):
        if abs(self.f(0.0)) > self.tol or abs(self.df(0.0)) > self.tol:
            raise DomainError("test functions must satisfy f(0) = f'(0) = 0")


def stein_apply(s: float, tf: TestFunction, x: float) -> float:
    """s f''(x) - x f'(x) - 2(s - 1) f(x)."""
    return s * tf.d2f(x) - x * tf.df(x) - 2.0 * (s - 1.0) * tf.f(x)


def stein_expectation(s: float, tf: TestFunction, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """E A f(Z) for Z ~ K_s by quadrature against the density."""
    dist = KsDist(s, quad)
    with warnings.catch_warnings():
        # the density itself carries ~1e-13 relative error, which QUADPACK flags as roundoff
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda x: stein_apply(s, tf, x) * dist.density(x), 0.0, math.inf,
            epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=400,
        )
    if not err <= 1e-8:
        raise ConvergenceError(f"E A f(Z) not converged for s={s}: error estimate {err:.3e}")
    return val


def _log_density_ratio_d(s: float, x: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """V_s'(x) / V_s(x) for any s >= 1/2 and x > 0."""
    if s == 1.0:
        return 0.0
    if s == 0.5:
        return 1.0 / x
    z = x * x / (2.0 * s)
    # dV/dx = (x/s) dU/dz and dU/dz = -(s-1) U(s, 3/2, z)
    log_ratio = log_kummer_u(s, 1.5, z, quad) - log_kummer_u(s - 1.0, 0.5, z, quad)
    return -(x / s) * (s - 1.0) * math.exp(log_ratio)


def log_density_ratio_d(s: float, x: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """d(x) = V_s'(x) / V_s(x), the log-derivative of V_s, for s >= 1."""
    if not s >= 1.0:
        raise DomainError(f"d(x) is used for s >= 1, got {s!r}")
    if not x > 0:
        raise DomainError(f"d(x) needs x > 0, got {x!r}")
    return _log_density_ratio_d(s, x, quad)


def gaussian_mills_ratio(s: float, x: float) -> float:
    """exp(x^2 / (2s)) * int_x^inf exp(-t^2 / (2s)) dt."""
    if not (s > 0 and x >= 0):
        raise DomainError("gaussian_mills_ratio needs s > 0 and x >= 0")
    return math.sqrt(s * math.pi / 2.0) * float(sps.erfcx(x / math.sqrt(2.0 * s)))


def smoothed_indicator(a: float, eps: float) -> tuple[Func, list[float]]:
    """Piecewise-linear version of 1[x <= a]: 1 up to a, 0 from a + eps.

    Returns the function and its kinks, which the solver uses as panel
    breakpoints.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")

    def h(x: float) -> float:
        if x <= a:
            return 1.0
        if x >= a + eps:
            return 0.0
        return 1.0 - (x - a) / eps

    return h, [a, a + eps]


# -- solver -----------------------------------------------------------------

_MAX_DEG = 48
_PANEL_WIDTH = 0.5
_COEF_TOL = 1e-14
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(30)


def _fit_panel(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float, depth: int = 0) -> list[Chebyshev]:
    """Chebyshev interpolants of fn covering [a, b], split until resolved."""
    for deg in (16, 32, _MAX_DEG):
        cheb = Chebyshev.interpolate(fn, deg, domain=[a, b])
        c = np.abs(cheb.coef)
        if c[-3:].max() <= _COEF_TOL * max(c.max(), 1e-300):
            return [cheb]
    if depth >= 12:
        raise ConvergenceError(f"integrand not resolved on [{a:.6g}, {b:.6g}]")
    m = 0.5 * (a + b)
    return _fit_panel(fn, a, m, depth + 1) + _fit_panel(fn, m, b, depth + 1)


class _Cumulative:
    """Piecewise-Chebyshev antiderivative F(x) = int_lo^x fn on [lo, hi]."""

    def __init__(self, fn, edges: Sequence[float], relative_head: bool = False):
        self.fn = fn
        self.relative_head = relative_head
        pieces = []
        for a, b in zip(edges[:-1], edges[1:]):
            pieces.extend(_fit_panel(fn, a, b))
        self.lefts = np.array([p.domain[0] for p in pieces])
        self.antis = [p.integ(lbnd=p.domain[0]) for p in pieces]
        self.masses = np.array([anti(p.domain[1]) for anti, p in zip(self.antis, pieces)])
        # head[k] = int_lo^{left_k}; tail[k] = int_{left_k}^{hi}
        self.head = np.concatenate([[0.0], np.cumsum(self.masses)[:-1]])
        self.tail = np.cumsum(self.masses[::-1])[::-1]
        self.lo = float(edges[0])
        self.hi = float(edges[-1])

    def _locate(self, x: float) -> int:
        return max(int(np.searchsorted(self.lefts, x, side="right")) - 1, 0)

    def head_value(self, x: float) -> float:
        k = self._locate(x)
        if k == 0 and self.relative_head:
            # Gauss-Legendre on [lo, x] keeps relative accuracy as x -> lo,
            # where the antiderivative only has absolute accuracy
            half = 0.5 * (x - self.lo)
            return float(half * np.dot(_GL_WEIGHTS, self.fn(self.lo + half * (_GL_NODES + 1.0))))
        return float(self.head[k] + self.antis[k](x))

    def tail_value(self, x: float) -> float:
        """int_x^hi fn, accumulated from the right end for tail accuracy."""
        k = self._locate(x)
        return float(self.tail[k] - self.antis[k](x))

    @property
    def total(self) -> float:
        return float(self.tail[0])


@dataclass
class SteinSolution:
    """Solution of A f = h - E h(Z) sampled on a grid.

    ``f``, ``df`` and ``d2f`` hold values at ``grid``; ``d2f`` is obtained
    from the equation itself.  The ``evaluate_*`` methods and ``residual``
    work at arbitrary points of the solution interval.
    """

    s: float
    h: Func
    h_mean: float
    grid: np.ndarray
    f: np.ndarray
    df: np.ndarray
    d2f: np.ndarray
    _solver: "_Solver" = field(repr=False)

    def evaluate_f(self, x: float) -> float:
        return self._solver.f(x)

    def evaluate_df(self, x: float) -> float:
        return self._solver.df(x)

    def g(self, x: float) -> float:
        return self._solver.g(x)

    def inner_integral(self, y: float, form: str = "auto") -> float:
        """int_0^y (h - E h) kappa_s, from the head, the tail, or whichever is stabler."""
        return self._solver.inner(y, form)

    def residual(self, x: float) -> float:
        """s (f')'(x) - x f'(x) - 2(s-1) f(x) - (h(x) - E h), with (f')' by finite differences."""
        sv = self._solver
        return self.s * sv.d_df(x) - x * sv.df(x) - 2.0 * (self.s - 1.0) * sv.f(x) - (self.h(x) - self.h_mean)

    def max_residual(self) -> float:
        return max(abs(self.residual(float(x))) for x in self.grid)


class _Solver:
    def __init__(self, s: float, h: Func, upper: float, breakpoints: Sequence[float], quad: QuadratureConfig):
        self.s = s
        self.h = h
        self.dist = KsDist(s, quad)
        self.quad = quad
        dist = self.dist

        # beyond `hi` the remaining mass is negligible but still integrated
        hi = max(upper + 1.0, 1.0)
        while dist.survival(hi) > 1e-17:
            hi *= 1.25
        self.median = dist.quantile(0.5)
        self.breaks = sorted({float(b) for b in breakpoints if 0.0 < b < hi})
        # a short first panel limits the cost of the relative-accuracy head rule
        cuts = set(self.breaks) | {self.median, min(0.05, 0.5 * self.median)}
        n_uniform = max(int(math.ceil(hi / _PANEL_WIDTH)), 1)
        cuts |= {hi * k / n_uniform for k in range(1, n_uniform)}
        edges = [0.0] + sorted(c for c in cuts if 0.0 < c < hi) + [hi]

        def hk(xs):
            return np.array([h(float(x)) * dist.density(float(x)) for x in xs])

        self.hk = _Cumulative(hk, edges, relative_head=True)
        # cdf by the same rule, so that the head form cancels cleanly near 0
        self.kc = _Cumulative(lambda xs: np.array([dist.density(float(x)) for x in xs]), edges, relative_head=True)

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            beyond, _ = integrate.quad(lambda x: h(x) * dist.density(x), hi, math.inf, epsabs=1e-300, limit=200)
        self.beyond = beyond
        self.mean = self.hk.total + beyond
        # a constant target leaves only rounding noise in G, which no panel fit resolves
        probe = np.linspace(0.0, hi, 257)
        self.null = max(abs(h(float(x)) - self.mean) for x in probe) <= 1e-13 * max(1.0, abs(self.mean))

        def q(xs):
            if self.null:
                return np.zeros(len(xs))
            return np.array([self._q(float(x)) for x in xs])

        self.phi = _Cumulative(q, edges)
        self.hi = hi

    # inner integral G(y) = int_0^y (h - Eh) kappa
    def inner(self, y: float, form: str = "auto") -> float:
        if form == "auto":
            form = "head" if y < self.median else "tail"
        if form == "head":
            return self.hk.head_value(y) - self.mean * self.kc.head_value(y)
        if form == "tail":
            return -(self.hk.tail_value(y) + self.beyond - self.mean * self.dist.survival(y))
        raise ValueError(f"unknown form {form!r}")

    def g(self, y: float) -> float:
        if y == 0.0 or self.null:
            return 0.0
        return self.inner(y) / (self.s * self.dist.density(y))

    def _v(self, y: float) -> float:
        return kummer_u(self.s - 1.0, 0.5, y * y / (2.0 * self.s), self.quad)

    def _q(self, y: float) -> float:
        return self.g(y) / self._v(y)

    def _check_range(self, x: float) -> None:
        if not 0.0 <= x <= self.hi:
            raise DomainError(f"x={x} outside the solution interval [0, {self.hi:.6g}]")

    def f(self, x: float) -> float:
        self._check_range(x)
        if x == 0.0:
            return 0.0
        return self._v(x) * self.phi.head_value(x)

    def df(self, x: float) -> float:
        self._check_range(x)
        if x == 0.0:
            return 0.0
        return _log_density_ratio_d(self.s, x, self.quad) * self.f(x) + self.g(x)

    def d2f(self, x: float) -> float:
        return (self.h(x) - self.mean + x * self.df(x) + 2.0 * (self.s - 1.0) * self.f(x)) / self.s

    def d_df(self, x: float) -> float:
        """Derivative of f' by a fourth-order stencil kept on one side of any kink."""
        step = 1e-3 * max(1.0, x)
        while True:
            right_clear = not any(x < b < x + 4.5 * step for b in self.breaks)
            left_clear = x >= 4.5 * step and not any(x - 4.5 * step < b < x for b in self.breaks)
            if right_clear and left_clear and x not in self.breaks:
                v = [self.df(x + k * step) for k in (-2, -1, 1, 2)]
                return (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12.0 * step)
            if right_clear and x + 4.0 * step <= self.hi:
                v = [self.df(x + k * step) for k in range(5)]
                return (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12.0 * step)
            if left_clear:
                v = [self.df(x - k * step) for k in range(5)]
                return (25 * v[0] - 48 * v[1] + 36 * v[2] - 16 * v[3] + 3 * v[4]) / (12.0 * step)
            step *= 0.25


def stein_solve(
    s: float,
    h: Func,
    x,
    quad: QuadratureConfig = DEFAULT_QUAD,
    breakpoints: Sequence[float] = (),
    experimental: bool = False,
) -> SteinSolution:
    """Solve s f'' - x f' - 2(s-1) f = h - E h(Z) with f(0) = f'(0) = 0.

    ``breakpoints`` lists points where h is not smooth.  The solver is
    supported for s = 1/2 and s >= 1; for 1/2 < s < 1 pass
    ``experimental=True``.
    """
    s = float(s)
    if s < 0.5:
        raise DomainError(f"K_s requires s >= 1/2, got {s!r}")
    if 0.5 < s < 1.0 and not experimental:
        raise UnsupportedParametersError("stein_solve for 1/2 < s < 1 is experimental; pass experimental=True")
    grid = np.sort(np.atleast_1d(np.asarray(x, dtype=float)))
    if grid.size and grid[0] < 0:
        raise DomainError("evaluation points must be >= 0")
    solver = _Solver(s, h, float(grid[-1]) if grid.size else 1.0, breakpoints, quad)
    f = np.array([solver.f(v) for v in grid])
    df = np.array([solver.df(v) for v in grid])
    d2f = np.array([solver.d2f(v) for v in grid])
    return SteinSolution(s, h, solver.mean, grid, f, df, d2f, solver)


# -- bound verification -------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    name: str
    passed: bool
    worst_margin: float  # min over the grid of (bound - value); negative means violated
    points: int


def _collect(name: str, margins: list[float], tol: float = 1e-12) -> BoundCheck:
    # tol absorbs rounding where a bound holds with equality (e.g. s = 1)
    worst = min(margins) if margins else math.inf
    return BoundCheck(name, bool(worst >= -tol), worst, len(margins))


def check_bounds(s: float, grid: Sequence[float], quad: QuadratureConfig = DEFAULT_QUAD) -> list[BoundCheck]:
    """Evaluate the analytic bounds available for this s on a grid of x > 0.

    s >= 1 gets the Mills-ratio, gamma-ratio, d(x) and Gaussian Mills checks.
    s = 1/2 gets only the Gaussian Mills check.  Other s are refused.
    """
    s = float(s)
    if not (s == 0.5 or s >= 1.0):
        raise UnsupportedParametersError(
            f"bounds are established only for s = 1/2 or s >= 1, got s={s}"
        )
    xs = [float(v) for v in grid if v > 0]
    out = [
        _collect(
            "gaussian_mills",
            [min(math.sqrt(s * math.pi / 2.0), s / x) - gaussian_mills_ratio(s, x) for x in xs],
        )
    ]
    if s == 0.5:
        return out
    dist = KsDist(s, quad)
    out.append(_collect("ks_mills", [min(math.sqrt(math.pi / 2.0), s / x) - dist.mills_ratio(x) for x in xs]))
    r = sqrt_s_gamma_ratio(s)
    # the lower bound is strict
    out.append(_collect("gamma_ratio", [r - 1.0 if r > 1.0 else -1.0, math.sqrt(math.pi) - r]))
    d_cap = math.sqrt(2.0) / r
    ds = [log_density_ratio_d(s, x, quad) for x in xs]
    out.append(_collect("d_bound", [m for d in ds for m in (-d, d_cap - (-d))]))
    out.append(_collect("xd_bound", [m for x, d in zip(xs, ds) for m in (-x * d, 2.0 * (s - 1.0) + x * d)]))
    return out
