"""Generalized Polya urns.

An urn (alpha, beta; gamma, delta)_{i,j} starts with i black and j white
balls.  A ball is drawn uniformly and returned; a black draw adds alpha
black and beta white balls, a white draw adds gamma black and delta white.
Most of this module concerns the (2,0;1,1)_{i,1} urn, whose white count
after n draws is W_n = sum_{t=0}^n X_t with X_0 = 1 and X_t the indicator
that draw t is white.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import ConsistencyError, DomainError, ResourceLimitError, UnsupportedParametersError
from .pmf import Pmf

__all__ = [
    "UrnSpec",
    "UrnState",
    "DP_LIMIT",
    "simulate",
    "simulate_many",
    "exact_pmf",
    "mean_white",
    "second_moment_white",
    "expected_x",
    "joint_xjxk",
    "jk_table",
    "sample_jk",
    "conditioned_pmf",
    "reserved_process_pmf",
    "simulate_conditioned",
    "simulate_m_jk",
    "coupled_r_w2",
    "polya_coupling_nm",
    "polya_cdf",
    "mixture_check",
    "embedded_polya_check",
]

# cap on states * steps for the exact dynamic program
DP_LIMIT = 10**8


@dataclass(frozen=True)
class UrnSpec:
    alpha: int
    beta: int
    gamma: int
    delta: int
    i: int
    j: int

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "i", "j"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {v!r}")
        if self.j < 1:
            raise DomainError("an urn needs at least one white ball")

    @classmethod
    def preferential(cls, i: int, j: int = 1) -> "UrnSpec":
        """The (2,0;1,1) urn."""
        return cls(2, 0, 1, 1, i, j)

    @property
    def balanced(self) -> bool:
        return self.alpha + self.beta == self.gamma + self.delta

    def initial(self) -> "UrnState":
        return UrnState(0, self.j, self.i + self.j)


@dataclass(frozen=True)
class UrnState:
    t: int
    white: int
    total: int

    def step(self, spec: UrnSpec, white_drawn: bool) -> "UrnState":
        if white_drawn:
            return UrnState(self.t + 1, self.white + spec.delta, self.total + spec.gamma + spec.delta)
        return UrnState(self.t + 1, self.white + spec.beta, self.total + spec.alpha + spec.beta)


def simulate(spec: UrnSpec, n: int, rng: np.random.Generator) -> int:
    """White count after n draws of one trajectory."""
    if n < 0:
        raise DomainError("n must be >= 0")
    state = spec.initial()
    for _ in range(n):
        state = state.step(spec, bool(rng.random() * state.total < state.white))
    return state.white


def simulate_many(spec: UrnSpec, n: int, replicates: int, rng: np.random.Generator) -> np.ndarray:
    """Terminal white counts of independent trajectories, advanced in lockstep."""
    if n < 0 or replicates < 0:
        raise DomainError("n and replicates must be >= 0")
    white = np.full(replicates, spec.j, dtype=np.int64)
    total = np.full(replicates, spec.i + spec.j, dtype=np.int64)
    for _ in range(n):
        w = rng.random(replicates) * total < white
        white += np.where(w, spec.delta, spec.beta)
        total += np.where(w, spec.gamma + spec.delta, spec.alpha + spec.beta)
    return white


def _check_dp_size(n: int) -> None:
    if (n + 1) * max(n, 1) > DP_LIMIT:
        raise ResourceLimitError(f"exact DP for n={n} exceeds the {DP_LIMIT:.0e} state-step budget")


def exact_pmf(spec: UrnSpec, n: int) -> Pmf:
    """Exact law of the white count after n draws of a balanced urn.

    The state after t draws is the number k of white draws so far; the
    white count is then j + delta k + beta (t - k) and the total is
    deterministic.
    """
    if not spec.balanced:
        raise UnsupportedParametersError("exact_pmf needs a balanced urn (deterministic total)")
    if n < 0:
        raise DomainError("n must be >= 0")
    _check_dp_size(n)
    add = spec.alpha + spec.beta
    p = np.array([1.0])
    for t in range(1, n + 1):
        k = np.arange(t)
        white = spec.j + spec.delta * k + spec.beta * (t - 1 - k)
        pw = white / (spec.i + spec.j + (t - 1) * add)
        nxt = np.zeros(t + 1)
        nxt[:t] += p * (1.0 - pw)
        nxt[1:] += p * pw
        p = nxt
    values = spec.j + spec.delta * np.arange(n + 1) + spec.beta * (n - np.arange(n + 1))
    lo = int(values.min())
    w = np.zeros(int(values.max()) - lo + 1)
    np.add.at(w, values - lo, p)
    return Pmf.from_weights(lo, w)


# -- moments of the (2,0;1,1)_{i,1} urn ------------------------------------------

def _log_mean_white(i: int, n: int) -> float:
    # prod_{t=1}^n (i + 2t) / (i + 2t - 1) written with gamma functions
    return (
        math.lgamma(n + 1 + i / 2) + math.lgamma((i + 1) / 2)
        - math.lgamma(1 + i / 2) - math.lgamma(n + (i + 1) / 2)
    )


def _check_i_n(i: int, n: int) -> None:
    if i < 0 or n < 0:
        raise DomainError("need i >= 0 and n >= 0")


def mean_white(i: int, n: int) -> float:
    """E W_n for the (2,0;1,1)_{i,1} urn."""
    _check_i_n(i, n)
    return math.exp(_log_mean_white(i, n))


def second_moment_white(i: int, n: int) -> float:
    """E W_n^2 = 2(i + 2n + 1)/(i + 1) - E W_n."""
    _check_i_n(i, n)
    return 2.0 * (i + 2 * n + 1) / (i + 1) - mean_white(i, n)


def expected_x(i: int, t: int) -> float:
    """E X_t, the chance that draw t is white (E X_0 = 1)."""
    if t == 0:
        return 1.0
    return mean_white(i, t - 1) / (i + 2 * t - 1)


def _expected_d(i: int, m: int) -> float:
    # E W_m (1 + W_m)
    return 2.0 * (i + 2 * m + 1) / (i + 1)


def _factor_a(i: int, j: int) -> float:
    """E(X_j X_k) = A_j E X_k for j < k; A_0 = 1."""
    if j == 0:
        return 1.0
    return _expected_d(i, j - 1) / ((i + 2 * j - 1) * mean_white(i, j))  # = 2 / ((i+1) E W_j)


def joint_xjxk(i: int, j: int, k: int, n: int) -> float:
    """E(X_j X_k) for 0 <= j, k <= n in the (2,0;1,1)_{i,1} urn.

    For 1 <= j < k, conditioning on the first j draws gives

        E(X_j X_k) = E[W_{j-1}(1 + W_{j-1})] / (i + 2j - 1)
                     * E W_{k-1} / (E W_j (i + 2k - 1)).
    """
    _check_i_n(i, n)
    j, k = min(j, k), max(j, k)
    if j < 0 or k > n:
        raise DomainError(f"indices must satisfy 0 <= j, k <= n (j={j}, k={k}, n={n})")
    if j == k:
        return expected_x(i, j)
    return _factor_a(i, j) * expected_x(i, k)


def _jk_factors(i: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(n + 1)
    log_mw = np.array([_log_mean_white(i, m) for m in range(n + 1)])
    ex = np.ones(n + 1)
    ex[1:] = np.exp(log_mw[:-1]) / (i + 2 * t[1:] - 1)
    a = np.ones(n + 1)
    a[1:] = 2.0 / ((i + 1) * np.exp(log_mw[1:]))
    return a, ex


def jk_table(i: int, n: int) -> np.ndarray:
    """Matrix of P(J = j, K = k) = E(X_j X_k) / E W_n^2."""
    _check_i_n(i, n)
    _check_dp_size(n)
    a, ex = _jk_factors(i, n)
    upper = np.triu(np.outer(a, ex), k=1)
    table = upper + upper.T + np.diag(ex)
    b2 = second_moment_white(i, n)
    total = math.fsum(table.ravel())
    if abs(total / b2 - 1.0) > 1e-9:
        raise ConsistencyError(f"E W^2 = {b2} but sum of E(X_j X_k) = {total}")
    return table / b2


def sample_jk(i: int, n: int, rng: np.random.Generator, size: Optional[int] = None):
    """Draw (J, K) with P(J = j, K = k) = E(X_j X_k) / E W_n^2.

    Off the diagonal E(X_j X_k) = A_j E X_k (j < k), so the pair is drawn as
    K from its marginal, then J given K, then a fair swap.
    """
    _check_i_n(i, n)
    scalar = size is None
    m = 1 if scalar else int(size)
    a, ex = _jk_factors(i, n)
    cum_a = np.concatenate([[0.0], np.cumsum(a)])  # cum_a[k] = sum_{j<k} a_j
    off_k = ex * cum_a[:-1]
    diag_mass = math.fsum(ex)
    off_mass = 2.0 * math.fsum(off_k)
    b2 = second_moment_white(i, n)
    if abs((diag_mass + off_mass) / b2 - 1.0) > 1e-9:
        raise ConsistencyError(f"E W^2 = {b2} but sum of E(X_j X_k) = {diag_mass + off_mass}")

    on_diag = rng.random(m) * (diag_mass + off_mass) < diag_mass
    jj = np.empty(m, dtype=np.int64)
    kk = np.empty(m, dtype=np.int64)
    nd = int(on_diag.sum())
    d = rng.choice(n + 1, size=nd, p=ex / diag_mass)
    jj[on_diag] = d
    kk[on_diag] = d
    no = m - nd
    if no:
        k = rng.choice(n + 1, size=no, p=off_k / math.fsum(off_k))
        u = rng.random(no) * cum_a[k]
        j = np.searchsorted(cum_a, u, side="right") - 1
        j = np.minimum(j, k - 1)
        swap = rng.random(no) < 0.5
        jj[~on_diag] = np.where(swap, k, j)
        kk[~on_diag] = np.where(swap, j, k)
    if scalar:
        return int(jj[0]), int(kk[0])
    return jj, kk


# -- the (2,0;1,1)_{i,1} urn conditioned on white draws ----------------------------

def _reserved(reserved: Iterable[int], n: int) -> list[int]:
    s = sorted({int(t) for t in reserved if t != 0})
    if any(t < 0 or t > n for t in s):
        raise DomainError(f"conditioning draws must lie in 1..n (n={n}), got {s}")
    return s


def conditioned_pmf(i: int, n: int, draws: Iterable[int]) -> Pmf:
    """Law of W_n given X_t = 1 for every t in ``draws``, by filtering the DP.

    Index 0 is always white and is ignored.
    """
    _check_i_n(i, n)
    _check_dp_size(n)
    s = set(_reserved(draws, n))
    p = np.array([1.0])
    for t in range(1, n + 1):
        pw = (1.0 + np.arange(t)) / (i + 2 * t - 1)
        nxt = np.zeros(t + 1)
        if t not in s:
            nxt[:t] += p * (1.0 - pw)
        nxt[1:] += p * pw
        p = nxt
    return Pmf.from_weights(1, p)


def _reserved_total(i: int, t: int, res: list[int]) -> int:
    """Total balls before draw t in the reserved-ball process."""
    return i + 1 + len(res) + 2 * (t - 1) - sum(1 for r in res if r < t)


def reserved_process_pmf(i: int, n: int, draws: Iterable[int]) -> Pmf:
    """Exact law of the reserved-ball process that realizes the conditioning.

    One white ball is set aside for each conditioning draw.  Those draws
    take the reserved ball and add a single black ball; all other draws
    follow the (2,0;1,1) rule on the full urn.  With draws {j, k}, j < k,
    this is the M^{j,k} process started from M_0 = 3.
    """
    _check_i_n(i, n)
    _check_dp_size(n)
    res = _reserved(draws, n)
    rs = set(res)
    start = 1 + len(res)
    p = np.array([1.0])  # p[m] = P(m white draws among the free draws so far)
    for t in range(1, n + 1):
        if t in rs:
            continue
        pw = (start + np.arange(p.size)) / _reserved_total(i, t, res)
        nxt = np.zeros(p.size + 1)
        nxt[:-1] += p * (1.0 - pw)
        nxt[1:] += p * pw
        p = nxt
    return Pmf.from_weights(start, p)


class _ReservedChain:
    """Vectorized reserved-ball process for pairs (j, k); see reserved_process_pmf."""

    def __init__(self, i: int, n: int, j, k):
        j = np.atleast_1d(np.asarray(j, dtype=np.int64))
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        self.lo = np.minimum(j, k)
        self.hi = np.maximum(j, k)
        if np.any(self.hi > n) or np.any(self.lo < 0):
            raise DomainError("pairs must lie in 0..n")
        self.a_on = self.hi > 0                           # reserved draw at hi
        self.b_on = (self.lo > 0) & (self.lo < self.hi)   # reserved draw at lo
        n_res = self.a_on.astype(np.int64) + self.b_on
        self.white = 1 + n_res
        self.base = i + 1 + n_res

    def step(self, t: int, u: np.ndarray) -> None:
        total = self.base + 2 * (t - 1) - (self.a_on & (self.hi < t)) - (self.b_on & (self.lo < t))
        free = ~((self.a_on & (self.hi == t)) | (self.b_on & (self.lo == t)))
        self.white += free & (u * total < self.white)


def simulate_conditioned(i: int, n: int, j, k, rng: np.random.Generator) -> np.ndarray:
    """Terminal white counts of the reserved-ball process for pairs (j, k).

    Vectorized over arrays j, k; each pair gives law(W_n | X_j = X_k = 1),
    including the cases j = 0, k = 0 and j = k.
    """
    _check_i_n(i, n)
    chain = _ReservedChain(i, n, j, k)
    for t in range(1, n + 1):
        chain.step(t, rng.random(chain.white.size))
    return chain.white


def simulate_m_jk(i: int, n: int, j: int, k: int, rng: np.random.Generator) -> int:
    """One draw of M_n^{j,k}, the urn conditioned on white draws j < k."""
    if not 1 <= j < k <= n:
        raise DomainError(f"need 1 <= j < k <= n, got j={j}, k={k}, n={n}")
    return int(simulate_conditioned(i, n, j, k, rng)[0])


def coupled_r_w2(i: int, n: int, rng: np.random.Generator, size: Optional[int] = None):
    """Shared-uniform coupling of R ~ (2,0;1,1)^{n-1}_{i,3} and W'' = M_n^{J,K}.

    Returns (R, W'', agree).  Draw t of both chains uses the same uniform;
    the chains differ only through the reserved draws J and K.
    """
    _check_i_n(i, n)
    if n < 2:
        raise DomainError("coupling needs n >= 2")
    m = 1 if size is None else int(size)
    jj, kk = sample_jk(i, n, rng, m)
    chain = _ReservedChain(i, n, jj, kk)
    r = np.full(m, 3, dtype=np.int64)
    for t in range(1, n + 1):
        u = rng.random(m)
        if t < n:
            r += u * (i + 2 * t + 1) < r
        chain.step(t, u)
    w2 = chain.white
    agree = r == w2
    if size is None:
        return int(r[0]), int(w2[0]), bool(agree[0])
    return r, w2, agree


# -- classical Polya urn coupling ------------------------------------------------

def polya_cdf(n: int, k: float) -> float:
    """P(N <= k) for N ~ (1,0;0,1)^{n-3}_{1,2}: k(k-1) / ((n-1)(n-2))."""
    if n < 3:
        raise DomainError("need n >= 3")
    k = math.floor(k)
    if k < 2:
        return 0.0
    if k >= n - 1:
        return 1.0
    return k * (k - 1) / ((n - 1) * (n - 2))


def polya_coupling_nm(n, rng: np.random.Generator, size: Optional[int] = None, u1=None, u2=None):
    """Couple N ~ (1,0;0,1)^{n-3}_{1,2} and M ~ (1,0;0,1)^{n-3}_{2,1} to two uniforms.

        N = max(ceil((n-1) U1), 1 + ceil((n-2) U2))
        M = min(1 + floor((n-1) U1), 1 + floor((n-2) U2))

    M is N computed from (1 - U1, 1 - U2) and reflected, so law(M) = law(n - N),
    while |N - n max(U1, U2)| < 3 and |M - n min(U1, U2)| < 3.  ``n`` may be
    an array (one urn size per draw), and the uniforms may be supplied.
    Returns (N, M, U1, U2).
    """
    n_arr = np.asarray(n, dtype=np.int64)
    if np.any(n_arr < 3):
        raise DomainError("need n >= 3")
    shape = n_arr.shape if size is None and n_arr.ndim else size
    if u1 is None:
        u1 = rng.random(shape)
    if u2 is None:
        u2 = rng.random(shape)
    big = np.maximum(np.ceil((n_arr - 1) * u1), 1 + np.ceil((n_arr - 2) * u2)).astype(np.int64)
    small = np.minimum(1 + np.floor((n_arr - 1) * u1), 1 + np.floor((n_arr - 2) * u2)).astype(np.int64)
    if np.ndim(big) == 0:
        return int(big), int(small), float(u1), float(u2)
    return big, small, u1, u2


# -- exact identities ------------------------------------------------------------

def _mix(weights: Iterable[tuple[float, Pmf]]) -> Pmf:
    items = list(weights)
    lo = min(p.offset for _, p in items)
    hi = max(p.offset + len(p) for _, p in items)
    w = np.zeros(hi - lo)
    for c, p in items:
        w[p.offset - lo:p.offset - lo + len(p)] += c * p.probs
    return Pmf.from_weights(lo, w)


def mixture_check(i: int, n: int) -> float:
    """TV distance between (2,0;1,1)^n_{i,1} and its first-draw mixture.

    The mixture is (2,0;1,1)^{n-1}_{i+1,2} w.p. 1/(1+i) and
    (2,0;1,1)^{n-1}_{i+2,1} otherwise.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    lhs = exact_pmf(UrnSpec.preferential(i, 1), n)
    parts = [(1.0 / (1 + i), exact_pmf(UrnSpec.preferential(i + 1, 2), n - 1))]
    if i > 0:
        parts.append((i / (1.0 + i), exact_pmf(UrnSpec.preferential(i + 2, 1), n - 1)))
    return lhs.total_variation(_mix(parts))


def embedded_polya_check(i: int, n: int) -> tuple[float, float]:
    """TV gaps for the two embedded classical-urn identities.

    With R ~ (2,0;1,1)^{n-1}_{i,3}, the mixture over R of
    (1,0;0,1)^{R-3}_{1,2} should equal (2,0;1,1)^{n-1}_{i+1,2}, and that of
    (1,0;0,1)^{R-3}_{2,1} should equal (2,0;1,1)^{n-1}_{i+2,1}.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    r = exact_pmf(UrnSpec(2, 0, 1, 1, i, 3), n - 1)
    mix1 = _mix((p, exact_pmf(UrnSpec(1, 0, 0, 1, 1, 2), int(v) - 3)) for v, p in zip(r.support, r.probs) if p > 0)
    mix2 = _mix((p, exact_pmf(UrnSpec(1, 0, 0, 1, 2, 1), int(v) - 3)) for v, p in zip(r.support, r.probs) if p > 0)
    gap1 = mix1.total_variation(exact_pmf(UrnSpec.preferential(i + 1, 2), n - 1))
    gap2 = mix2.total_variation(exact_pmf(UrnSpec.preferential(i + 2, 1), n - 1))
    return gap1, gap2
