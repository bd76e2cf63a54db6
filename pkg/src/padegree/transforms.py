"""Size bias, square bias and the s-transformed double size bias.

For W >= 0 with E W^2 > 0 the square bias W'' has
E W^2 f(W) = E W^2 E f(W''), and the s-transform of W is V W'' with

    V = Y max(U1, U2) + (1 - Y) min(U1, U2),   Y ~ Bernoulli(1 / (2s)),

independent of W''.  K_s is the unique fixed point: V Z'' has the law of Z
exactly when Z ~ K_s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConsistencyError, DomainError
from .pmf import Pmf
from .urns import coupled_r_w2, polya_coupling_nm, sample_jk, simulate_conditioned

__all__ = [
    "VMixer",
    "sample_v",
    "v_density",
    "size_bias_pmf",
    "square_bias_pmf",
    "tdsb_sample_discrete",
    "double_size_bias_sum",
    "urn_double_size_bias",
    "CouplingSample",
    "tdsb_coupling",
]


@dataclass(frozen=True)
class VMixer:
    s: float

    def __post_init__(self):
        if not self.s >= 0.5:
            raise DomainError(f"s must be >= 1/2, got {self.s!r}")

    @property
    def p(self) -> float:
        """P(Y = 1) = 1 / (2s)."""
        return 1.0 / (2.0 * self.s)

    def density(self, x: float) -> float:
        """(2 - 1/s) - 2x(1 - 1/s) on (0, 1)."""
        if not 0.0 <= x <= 1.0:
            return 0.0
        return (2.0 - 1.0 / self.s) - 2.0 * x * (1.0 - 1.0 / self.s)

    @property
    def mean(self) -> float:
        return (2.0 - 1.0 / self.s) / 2.0 - 2.0 * (1.0 - 1.0 / self.s) / 3.0


def sample_v(m: VMixer, rng: np.random.Generator, size=None):
    u1 = rng.random(size)
    u2 = rng.random(size)
    y = rng.random(size) < m.p
    return np.where(y, np.maximum(u1, u2), np.minimum(u1, u2))


def v_density(s: float, x: float) -> float:
    return VMixer(s).density(x)


def _reweight(p: Pmf, power: int, what: str) -> Pmf:
    if p.offset < 0:
        raise DomainError(f"{what} needs a non-negative support")
    w = p.probs * p.support.astype(float) ** power
    if not math.fsum(w) > 0:
        raise DomainError(f"{what} needs E W^{power} > 0")
    return Pmf.from_weights(p.offset, w)


def size_bias_pmf(p: Pmf) -> Pmf:
    """p'(w) proportional to w p(w)."""
    return _reweight(p, 1, "size bias")


def square_bias_pmf(p: Pmf) -> Pmf:
    """p''(w) proportional to w^2 p(w)."""
    return _reweight(p, 2, "square bias")


def tdsb_sample_discrete(p: Pmf, s: float, rng: np.random.Generator, size=None, scale: float = 1.0):
    """Draws of V W'' / scale, with W'' from the square bias of p."""
    w2 = square_bias_pmf(p).sample(rng, size)
    return sample_v(VMixer(s), rng, size) * w2 / scale


def double_size_bias_sum(
    exx: np.ndarray,
    conditional: Callable[[int, int, np.random.Generator], float],
    rng: np.random.Generator,
    size: int = 1,
) -> np.ndarray:
    """Square-bias draws of W = sum_i X_i for Bernoulli X_i.

    ``exx[j, k]`` is E(X_j X_k) and ``conditional(j, k, rng)`` draws
    sum_{i not in {j, k}} X_i given X_j = X_k = 1.  (J, K) is drawn with
    probabilities exx / E W^2, and the draw is
    conditional(J, K) + 2 - 1[J = K].
    """
    exx = np.asarray(exx, dtype=float)
    if exx.ndim != 2 or exx.shape[0] != exx.shape[1] or np.any(exx < 0):
        raise ConsistencyError("E(X_j X_k) must be a non-negative square table")
    b2 = math.fsum(exx.ravel())
    if not b2 > 0:
        raise ConsistencyError("E(X_j X_k) table has zero mass")
    flat = rng.choice(exx.size, size=size, p=exx.ravel() / b2)
    jj, kk = np.divmod(flat, exx.shape[1])
    return np.array([conditional(int(j), int(k), rng) + 2 - (j == k) for j, k in zip(jj, kk)])


def urn_double_size_bias(i: int, n: int, rng: np.random.Generator, size: Optional[int] = None):
    """Square-bias draws of W_n for the (2,0;1,1)_{i,1} urn via the reserved-ball process."""
    m = 1 if size is None else int(size)
    jj, kk = sample_jk(i, n, rng, m)
    out = simulate_conditioned(i, n, jj, kk, rng)
    return int(out[0]) if size is None else out


@dataclass(frozen=True)
class CouplingSample:
    """Joint draws of W, W'', V and W* = V W'' (unscaled), with R and agreement flags."""

    w: np.ndarray
    w2: np.ndarray
    v: np.ndarray
    w_star: np.ndarray
    r: np.ndarray
    agree: np.ndarray


def tdsb_coupling(i: int, n: int, rng: np.random.Generator, size: int) -> CouplingSample:
    """Couple W ~ (2,0;1,1)^n_{i,1} with its s-transform, s = (i + 1) / 2.

    R and W'' share uniforms; W is the first-draw mixture of the two
    classical Polya urns embedded in R, built from the same U1, U2 and Y
    that form V.  Hence |W - V R| < 3 surely and W* = V W''.
    """
    if n < 2:
        raise DomainError("coupling needs n >= 2")
    r, w2, agree = coupled_r_w2(i, n, rng, size)
    u1 = rng.random(size)
    u2 = rng.random(size)
    y = rng.random(size) < 1.0 / (1.0 + i)
    big, small, _, _ = polya_coupling_nm(r, rng, u1=u1, u2=u2)
    w = np.where(y, big, small)
    v = np.where(y, np.maximum(u1, u2), np.minimum(u1, u2))
    return CouplingSample(w, w2, v, v * w2, r, agree)
