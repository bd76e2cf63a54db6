"""Kolmogorov and Wasserstein distances between lattice laws and K_s, and rate fits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import optimize, stats

from .errors import DomainError
from .ks import KsDist
from .pmf import Pmf
from .pref_attachment import DegreeLawQuery, Model, degree_law_exact, scaling_b
from .urns import UrnSpec, exact_pmf, second_moment_white

__all__ = [
    "kolmogorov_pmf_vs_ks",
    "wasserstein_pmf_vs_ks",
    "kolmogorov_two_sample",
    "kolmogorov_samples_vs_pmf",
    "RateFit",
    "rate_fit",
    "DistanceReport",
    "distance_report",
    "rate_experiment",
    "reports_to_csv",
    "CSV_HEADER",
]

CSV_SCHEMA_VERSION = 1
CSV_HEADER = f"# padegree distance report, schema v{CSV_SCHEMA_VERSION}"
CSV_COLUMNS = ["model", "i", "n", "b", "kolmogorov", "wasserstein", "slope"]


def _atoms(p: Pmf, scale: float) -> tuple[np.ndarray, np.ndarray]:
    if not scale > 0:
        raise DomainError("scale must be positive")
    keep = p.probs > 0
    x = p.support[keep].astype(float) / scale
    if np.any(x < 0):
        raise DomainError("K_s lives on [0, inf); the pmf must have non-negative support")
    return x, np.minimum(np.cumsum(p.probs[keep]), 1.0)


def kolmogorov_pmf_vs_ks(p: Pmf, scale: float, d: KsDist) -> float:
    """sup_x |P(X / scale <= x) - K_s(x)|, attained at an atom or just below it."""
    x, F = _atoms(p, scale)
    G = np.asarray(d.cdf(x), dtype=float)
    F_left = np.concatenate([[0.0], F[:-1]])
    return float(max(np.max(np.abs(F - G)), np.max(np.abs(F_left - G))))


def wasserstein_pmf_vs_ks(p: Pmf, scale: float, d: KsDist) -> float:
    """int_0^inf |P(X / scale <= x) - K_s(x)| dx, piece by piece between atoms.

    On a piece [a, b] the step CDF is a constant c, and
    int_a^b K_s = (b - a) - (I(b) - I(a)) with I(x) = int_0^x P(Z > t) dt.
    A piece is split where K_s crosses c.
    """
    x, F = _atoms(p, scale)
    I = np.asarray(d.integrated_survival(x), dtype=float)
    G = np.asarray(d.cdf(x), dtype=float)

    def integral_g(a, b, ia, ib):
        return (b - a) - (ib - ia)

    # [0, x_0]: F = 0
    total = integral_g(0.0, x[0], 0.0, I[0])
    for k in range(x.size - 1):
        a, b, c = x[k], x[k + 1], F[k]
        if G[k] < c < G[k + 1]:
            xc = optimize.brentq(lambda t: d.cdf(t) - c, a, b, xtol=1e-15, rtol=1e-15)
            ic = d.integrated_survival(xc)
            total += c * (xc - a) - integral_g(a, xc, I[k], ic)
            total += integral_g(xc, b, ic, I[k + 1]) - c * (b - xc)
        else:
            piece = integral_g(a, b, I[k], I[k + 1]) - c * (b - a)
            total += abs(piece)
    # beyond the last atom F = 1
    total += d.moment(1.0) - I[-1]
    return float(total)


def kolmogorov_two_sample(a, b) -> float:
    """Two-sample Kolmogorov statistic sup |F_a - F_b|."""
    return float(stats.ks_2samp(np.asarray(a), np.asarray(b), method="asymp").statistic)


def kolmogorov_samples_vs_pmf(samples, p: Pmf) -> float:
    """sup |empirical CDF - CDF of p| for integer samples."""
    s = np.asarray(samples, dtype=np.int64)
    lo = min(int(s.min()), p.offset)
    hi = max(int(s.max()), p.offset + len(p) - 1)
    emp = np.bincount(s - lo, minlength=hi - lo + 1) / s.size
    ref = np.zeros(hi - lo + 1)
    ref[p.offset - lo:p.offset - lo + len(p)] = p.probs
    return float(np.max(np.abs(np.cumsum(emp) - np.cumsum(ref))))


# -- rate fitting ---------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    constants: np.ndarray  # d_n * sqrt(n)

    @property
    def constant_ratio(self) -> float:
        return float(self.constants.max() / self.constants.min())


def rate_fit(table: Iterable[tuple[float, float]]) -> RateFit:
    """Least-squares fit of log d against log n."""
    rows = [(float(n), float(dist)) for n, dist in table]
    if len(rows) < 3:
        raise DomainError("rate_fit needs at least 3 points")
    n = np.array([r[0] for r in rows])
    dist = np.array([r[1] for r in rows])
    if np.any(dist <= 0) or np.any(n <= 0):
        raise DomainError("rate_fit needs positive n and distances")
    slope, intercept = np.polyfit(np.log(n), np.log(dist), 1)
    return RateFit(float(slope), float(intercept), dist * np.sqrt(n))


# -- reports ----------------------------------------------------------------------

@dataclass
class DistanceReport:
    model: str  # "1", "2" or "urn"
    i: int
    n: int
    b: float
    kolmogorov: float
    wasserstein: float
    method: str = "exact_dp"
    slope: Optional[float] = field(default=None)

    def __post_init__(self):
        if self.kolmogorov < 0 or self.kolmogorov > 1 or self.wasserstein < 0:
            raise DomainError("distances out of range")


def distance_report(model: str, i: int, n: int) -> DistanceReport:
    """Exact distances between the scaled law and its K_s limit.

    ``model`` "urn" is (2,0;1,1)^n_{i,1} against K_{(i+1)/2}; "1" and "2"
    are the degree of vertex i in G_n for the two graph models.
    """
    if model == "urn":
        p = exact_pmf(UrnSpec.preferential(i, 1), n)
        b = math.sqrt(second_moment_white(i, n))
        s = (i + 1) / 2.0
    else:
        q = DegreeLawQuery(Model.parse(model), n, i)
        p = degree_law_exact(q)
        b = scaling_b(q)
        s = q.limit_s
    d = KsDist(s)
    return DistanceReport(str(model), i, n, b, kolmogorov_pmf_vs_ks(p, b, d), wasserstein_pmf_vs_ks(p, b, d))


def rate_experiment(model: str, i: int, n_list: Sequence[int]) -> tuple[list[DistanceReport], RateFit]:
    reports = [distance_report(model, i, n) for n in n_list]
    fit = rate_fit((r.n, r.kolmogorov) for r in reports)
    for r in reports:
        r.slope = fit.slope
    return reports, fit


def reports_to_csv(reports: Iterable[DistanceReport]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([
            r.model, r.i, r.n, repr(r.b), repr(r.kolmogorov), repr(r.wasserstein),
            "" if r.slope is None else repr(r.slope),
        ])
    return buf.getvalue()
