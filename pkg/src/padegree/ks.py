"""The K_s family of limit laws.

K_s (s >= 1/2) has density

    kappa_s(x) = C_s exp(-x^2 / (2s)) U(s - 1, 1/2, x^2 / (2s)),
    C_s = Gamma(s) sqrt(2 / (s pi)),

on x > 0.  K_{1/2} is the law of sqrt(Exp(1)) and K_1 that of |N(0, 1)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sps

from .errors import DomainError, UnsupportedParametersError
from .special import DEFAULT_QUAD, QuadratureConfig, log_kummer_u

__all__ = ["KsDist"]

_LOG_SQRT_PI = 0.5 * math.log(math.pi)


def _elementwise(fn):
    """Let a scalar method accept array-likes, returning an ndarray of the same shape."""

    def wrapper(self, x, *args, **kwargs):
        if np.ndim(x) == 0:
            return fn(self, float(x), *args, **kwargs)
        arr = np.asarray(x, dtype=float)
        out = np.empty_like(arr)
        for idx, v in np.ndenumerate(arr):
            out[idx] = fn(self, float(v), *args, **kwargs)
        return out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@dataclass(frozen=True)
class KsDist:
    """Frozen K_s distribution.

    Scalar methods take floats or array-likes.  Samplers take a
    ``numpy.random.Generator`` owned by the caller.
    """

    s: float
    quad: QuadratureConfig = field(default=DEFAULT_QUAD, repr=False, compare=False)
    log_gamma_s: float = field(init=False, repr=False)
    log_c: float = field(init=False, repr=False)

    def __post_init__(self):
        s = float(self.s)
        if not (math.isfinite(s) and s >= 0.5):
            raise DomainError(f"K_s requires s >= 1/2, got {self.s!r}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "log_gamma_s", math.lgamma(s))
        object.__setattr__(self, "log_c", math.lgamma(s) + 0.5 * math.log(2.0 / (s * math.pi)))

    @property
    def prefactor(self) -> float:
        """C_s = sqrt(2 / (s pi)) Gamma(s)."""
        return math.exp(self.log_c)

    def _z(self, x: float) -> float:
        return x * x / (2.0 * self.s)

    # -- density and distribution function ---------------------------------

    @_elementwise
    def log_v(self, x: float) -> float:
        """log V_s(x) = log U(s - 1, 1/2, x^2 / (2s))."""
        return log_kummer_u(self.s - 1.0, 0.5, self._z(x), self.quad)

    @_elementwise
    def log_density(self, x: float) -> float:
        if x < 0:
            raise DomainError(f"density defined on x >= 0, got {x!r}")
        s = self.s
        if s == 0.5:
            return math.log(2.0 * x) - x * x if x > 0 else -math.inf
        if s == 1.0:
            return 0.5 * math.log(2.0 / math.pi) - 0.5 * x * x
        z = self._z(x)
        return self.log_c - z + log_kummer_u(s - 1.0, 0.5, z, self.quad)

    @_elementwise
    def density(self, x: float) -> float:
        return math.exp(self.log_density(x))

    @_elementwise
    def log_survival(self, x: float) -> float:
        """log P(Z > x), from Gamma(s)/sqrt(pi) e^{-z} U(s - 1/2, 1/2, z)."""
        if x < 0:
            raise DomainError(f"survival defined on x >= 0, got {x!r}")
        s = self.s
        if s == 0.5:
            return -x * x
        if s == 1.0:
            return float(sps.log_ndtr(-x)) + math.log(2.0)
        z = self._z(x)
        return self.log_gamma_s - _LOG_SQRT_PI - z + log_kummer_u(s - 0.5, 0.5, z, self.quad)

    @_elementwise
    def survival(self, x: float) -> float:
        return math.exp(self.log_survival(x))

    @_elementwise
    def cdf(self, x: float) -> float:
        if x < 0:
            raise DomainError(f"cdf defined on x >= 0, got {x!r}")
        if self.s == 0.5:
            return -math.expm1(-x * x)
        if self.s == 1.0:
            return math.erf(x / math.sqrt(2.0))
        return 1.0 - self.survival(x)

    @_elementwise
    def partial_first_moment(self, x: float) -> float:
        """E[Z; Z > x] = s C_s e^{-z} U(s - 1, -1/2, z)."""
        if x < 0:
            raise DomainError(f"defined on x >= 0, got {x!r}")
        s = self.s
        if x == 0:
            return self.moment(1.0)
        if s == 0.5:
            return x * math.exp(-x * x) + 0.5 * math.sqrt(math.pi) * sps.erfc(x)
        if s == 1.0:
            return math.sqrt(2.0 / math.pi) * math.exp(-0.5 * x * x)
        z = self._z(x)
        return s * math.exp(self.log_c - z + log_kummer_u(s - 1.0, -0.5, z, self.quad))

    @_elementwise
    def integrated_survival(self, x: float) -> float:
        """int_0^x P(Z > t) dt = E min(Z, x)."""
        if x < 0:
            raise DomainError(f"defined on x >= 0, got {x!r}")
        if x == 0:
            return 0.0
        return self.moment(1.0) - self.partial_first_moment(x) + x * self.survival(x)

    def quantile(self, p: float, tol: float = 1e-12) -> float:
        """Inverse CDF by bracketed bisection."""
        if not 0.0 < p < 1.0:
            raise DomainError(f"quantile needs 0 < p < 1, got {p!r}")
        target = 1.0 - p
        lo, hi = 0.0, 1.0
        while self.survival(hi) > target:
            lo, hi = hi, 2.0 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            sv = self.survival(mid)
            if abs(sv - target) <= tol or hi - lo <= 4e-16 * max(hi, 1.0):
                return mid
            if sv > target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def moment(self, r: float) -> float:
        """E Z^r = (s/2)^{r/2} Gamma(s) Gamma(r+1) / Gamma(r/2 + s), r > -1."""
        if not r > -1:
            raise DomainError(f"moments exist for r > -1, got {r!r}")
        s = self.s
        if r == int(r) and int(r) % 2 == 0 and r <= 40:
            # even r: the gamma ratio is a finite product, so E Z^2 = 1 holds exactly
            k = int(r) // 2
            out = float(math.factorial(2 * k))
            for j in range(k):
                out *= (s / 2.0) / (s + j)
            return out
        return math.exp(
            0.5 * r * math.log(s / 2.0) + self.log_gamma_s + math.lgamma(r + 1.0) - math.lgamma(0.5 * r + s)
        )

    @_elementwise
    def mills_ratio(self, x: float) -> float:
        """P(Z > x) / kappa_s(x); bounded by min(sqrt(pi/2), s/x) for s >= 1."""
        if self.s < 1.0:
            raise UnsupportedParametersError("Mills ratio bound requires s >= 1")
        if not x > 0:
            raise DomainError(f"mills_ratio needs x > 0, got {x!r}")
        return math.exp(self.log_survival(x) - self.log_density(x))

    # -- samplers ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw Z = sqrt(2 s X Y) with independent beta and gamma factors."""
        s = self.s
        if s == 0.5:
            return np.sqrt(rng.exponential(1.0, size))
        if s > 1.0:
            x = rng.beta(1.0, s - 1.0, size)
            y = rng.gamma(0.5, 1.0, size)
        else:
            x = rng.beta(0.5, s - 0.5, size)
            y = rng.exponential(1.0, size)
        return np.sqrt(2.0 * s * x * y)

    def sample_square_bias(self, rng: np.random.Generator, size=None):
        """Draw from the density x^2 kappa_s(x).

        Z^2 = 2 s X Y is a product of independents, so its size bias
        size-biases each factor: Beta(a, b) -> Beta(a + 1, b) and
        Gamma(k) -> Gamma(k + 1).
        """
        s = self.s
        if s == 0.5:
            return np.sqrt(rng.gamma(2.0, 1.0, size))
        if s > 1.0:
            x = rng.beta(2.0, s - 1.0, size)
            y = rng.gamma(1.5, 1.0, size)
        else:
            x = rng.beta(1.5, s - 0.5, size)
            y = rng.gamma(2.0, 1.0, size)
        return np.sqrt(2.0 * s * x * y)
