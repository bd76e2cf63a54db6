"""Kummer U, its z-derivative, and log-gamma.

U(a, b, z) is evaluated from its Laplace-type integral

    U(a, b, z) = 1/Gamma(a) * int_0^inf exp(-z t) t^(a-1) (1+t)^(b-a-1) dt,

valid for a, z > 0.  Non-positive ``a`` is reached only through the
reflection U(a, b, z) = z^(1-b) U(1+a-b, 2-b, z), and z = 0 only through
U(a, 1/2, 0) = Gamma(1/2) / Gamma(a + 1/2).  Everything is carried in log
space because the K_s family needs U at first parameters in the hundreds,
where U itself underflows.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate, optimize

from .errors import ConvergenceError, DomainError, UnsupportedParametersError

__all__ = [
    "QuadratureConfig",
    "DEFAULT_QUAD",
    "log_gamma",
    "log_kummer_u",
    "kummer_u",
    "kummer_u_deriv",
    "sqrt_s_gamma_ratio",
]

_LOG_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureConfig()


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def sqrt_s_gamma_ratio(s: float) -> float:
    """sqrt(s) * Gamma(s - 1/2) / Gamma(s), defined for s > 1/2."""
    if not s > 0.5:
        raise DomainError(f"ratio needs s > 1/2, got {s!r}")
    return math.exp(0.5 * math.log(s) + math.lgamma(s - 0.5) - math.lgamma(s))


def _softplus(y: float) -> float:
    return y + math.log1p(math.exp(-y)) if y > 0 else math.log1p(math.exp(y))


def _sigmoid(y: float) -> float:
    if y >= 0:
        return 1.0 / (1.0 + math.exp(-y))
    e = math.exp(y)
    return e / (1.0 + e)


def _check(value: float, err: float, cfg: QuadratureConfig, info: str) -> None:
    if not math.isfinite(value) or value <= 0:
        raise ConvergenceError(f"non-positive or non-finite integral ({info})")
    if err > 10.0 * cfg.rel_tol * value:
        raise ConvergenceError(
            f"quadrature error estimate {err:.3e} exceeds tolerance for value {value:.6e} ({info})"
        )


# integrand is negligible once it falls this many e-folds below its peak
_DROP = 60.0


def _log_integral(a: float, b: float, z: float, cfg: QuadratureConfig) -> float:
    """log of int_0^inf exp(-z t) t^(a-1) (1+t)^(b-a-1) dt for a, z > 0.

    With t = e^y the integrand exp(g(y)),
    g(y) = a y - z e^y + (b-a-1) log(1+e^y), is smooth and unimodal, decaying
    like e^(a y) to the left and doubly exponentially to the right.  The
    peak and the two points where g has dropped by ``_DROP`` are located by
    root finding; the integral over that window is then done adaptively.
    """
    c = b - a - 1.0

    def g(y):
        return a * y - z * math.exp(y) + c * _softplus(y)

    def dg(y):
        return a - z * math.exp(y) + c * _sigmoid(y)

    # dg(-inf) = a > 0, dg -> -inf on the right
    hi = math.log((a + abs(c) + 1.0) / z) + 1.0
    lo = min(hi - 1.0, -1.0)
    while dg(lo) <= 0:
        lo = 2.0 * lo - 1.0
    y_star = optimize.brentq(dg, lo, hi, xtol=1e-14, rtol=1e-14)
    g_max = g(y_star)
    level = g_max - _DROP

    left = y_star - 1.0
    while g(left) > level:
        left = y_star - 2.0 * (y_star - left)
    y_left = optimize.brentq(lambda y: g(y) - level, left, y_star, xtol=1e-10)
    right = y_star + 1.0
    while g(right) > level:
        right = y_star + 2.0 * (right - y_star)
    y_right = optimize.brentq(lambda y: g(y) - level, y_star, right, xtol=1e-10)

    def integrand(y):
        return math.exp(g(y) - g_max)

    # geometric breakpoints keep the peak resolved however wide the window is
    pts = [y_star]
    step = 1.0
    while y_star - step > y_left or y_star + step < y_right:
        pts.extend(p for p in (y_star - step, y_star + step) if y_left < p < y_right)
        step *= 2.0

    info = f"a={a}, b={b}, z={z}"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            integrand, y_left, y_right, points=sorted(pts),
            epsabs=0.0, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions,
        )
    _check(val, err, cfg, info)
    return math.log(val) + g_max


def log_kummer_u(a: float, b: float, z: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """log U(a, b, z) on the supported parameter family.

    Raises
    ------
    DomainError
        z < 0 or non-finite arguments.
    UnsupportedParametersError
        The point is not reachable by the integral, the reflection or the
        z = 0 closed form.
    """
    a, b, z = float(a), float(b), float(z)
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(z)):
        raise DomainError("kummer_u arguments must be finite")
    if z < 0:
        raise DomainError(f"kummer_u requires z >= 0, got {z!r}")
    if z == 0.0:
        if b == 0.5 and a > -0.5:
            return _LOG_SQRT_PI - math.lgamma(a + 0.5)
        raise UnsupportedParametersError(f"z = 0 supported only for b = 1/2, a > -1/2 (a={a}, b={b})")
    if a == 0.0:
        return 0.0
    if a < 0.0:
        a2 = 1.0 + a - b
        if a2 < 0.0:
            raise UnsupportedParametersError(f"a={a}, b={b} not reachable by reflection")
        return (1.0 - b) * math.log(z) + log_kummer_u(a2, 2.0 - b, z, cfg)
    return _log_integral(a, b, z, cfg) - math.lgamma(a)


def kummer_u(a: float, b: float, z: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Kummer's confluent hypergeometric function of the second kind."""
    return math.exp(log_kummer_u(a, b, z, cfg))


def kummer_u_deriv(a: float, b: float, z: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """dU/dz via U'(a, b, z) = -a U(a+1, b+1, z)."""
    if a == 0.0:
        return 0.0
    return -a * kummer_u(a + 1.0, b + 1.0, z, cfg)
