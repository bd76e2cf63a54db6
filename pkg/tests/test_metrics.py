import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from padegree.errors import DomainError
from padegree.ks import KsDist
from padegree.metrics import (
    CSV_HEADER,
    DistanceReport,
    distance_report,
    kolmogorov_pmf_vs_ks,
    kolmogorov_samples_vs_pmf,
    kolmogorov_two_sample,
    rate_fit,
    reports_to_csv,
    wasserstein_pmf_vs_ks,
)
from padegree.pmf import Pmf
from padegree.urns import UrnSpec, exact_pmf, second_moment_white


def grid_kolmogorov(p, scale, d, pts=200_001):
    xs = np.linspace(0, (p.offset + len(p)) / scale * 1.5 + 3, pts)
    step = np.array([p.cdf(math.floor(x * scale + 1e-12)) for x in xs])
    return float(np.max(np.abs(step - d.cdf(xs))))


def quad_wasserstein(p, scale, d):
    atoms = p.support / scale
    total = 0.0
    edges = [0.0] + list(atoms) + [atoms[-1] + 60.0]
    for k, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        c = 0.0 if k == 0 else float(np.sum(p.probs[:k]))
        total += integrate.quad(lambda x: abs(c - d.cdf(x)), a, b, epsabs=1e-13, limit=200)[0]
    return total


def test_kolmogorov_point_mass_at_median():
    for s in (0.5, 1.0, 3.0):
        d = KsDist(s)
        assert kolmogorov_pmf_vs_ks(Pmf.point_mass(1), 1.0 / d.quantile(0.5), d) == pytest.approx(0.5, abs=1e-10)


def test_kolmogorov_small_urn_against_grid():
    p = exact_pmf(UrnSpec.preferential(1, 1), 1)
    d = KsDist(1.0)
    b = math.sqrt(2.5)
    exact = kolmogorov_pmf_vs_ks(p, b, d)
    assert exact == pytest.approx(grid_kolmogorov(p, b, d), abs=1e-5)
    # the sup at an atom is a left limit, which a grid only approaches from below
    assert grid_kolmogorov(p, b, d) <= exact + 1e-12


@pytest.mark.parametrize("s,i,n", [(1.0, 1, 20), (2.0, 3, 15), (0.5, 0, 12)])
def test_kolmogorov_attained_at_atoms(s, i, n):
    p = exact_pmf(UrnSpec.preferential(i, 1), n)
    b = math.sqrt(second_moment_white(i, n))
    d = KsDist(s)
    exact = kolmogorov_pmf_vs_ks(p, b, d)
    grid = grid_kolmogorov(p, b, d, 40_001)
    assert grid <= exact + 1e-12
    assert exact - grid <= 2 * math.sqrt(2) * (8.0 / 40_000)


def _discretized(d, m, top=12.0):
    k = np.arange(int(top * m) + 1)
    upper = d.cdf((k + 0.5) / m)
    lower = np.concatenate([[0.0], upper[:-1]])
    return Pmf.from_weights(0, upper - lower)


def test_matched_discretization_converges():
    d = KsDist(2.0)
    gaps = [kolmogorov_pmf_vs_ks(_discretized(d, m), m, d) for m in (4, 16, 64)]
    wass = [wasserstein_pmf_vs_ks(_discretized(d, m), m, d) for m in (4, 16, 64)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 0.02
    assert wass[0] > wass[1] > wass[2] and wass[2] < 0.01


def test_wasserstein_point_mass_at_zero():
    d = KsDist(0.5)
    assert wasserstein_pmf_vs_ks(Pmf.point_mass(0), 1.0, d) == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-12)


@pytest.mark.parametrize("s,i,n", [(1.0, 1, 10), (2.0, 3, 8), (0.5, 0, 6), (1.5, 2, 25)])
def test_wasserstein_against_quadrature(s, i, n):
    p = exact_pmf(UrnSpec.preferential(i, 1), n)
    b = math.sqrt(second_moment_white(i, n))
    d = KsDist(s)
    assert wasserstein_pmf_vs_ks(p, b, d) == pytest.approx(quad_wasserstein(p, b, d), abs=1e-8)


def _w1_between(p, q, scale):
    lo = min(p.offset, q.offset)
    hi = max(p.offset + len(p), q.offset + len(q))
    fp = np.array([p.cdf(v) for v in range(lo, hi)])
    fq = np.array([q.cdf(v) for v in range(lo, hi)])
    return float(np.sum(np.abs(fp - fq))) / scale


_weights = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=12).filter(lambda w: sum(w) > 1e-2)


@settings(max_examples=40, deadline=None)
@given(_weights, _weights, st.integers(0, 6), st.integers(0, 6), st.floats(min_value=1.0, max_value=6.0))
def test_wasserstein_triangle(wp, wq, op, oq, scale):
    p, q = Pmf.from_weights(op, wp), Pmf.from_weights(oq, wq)
    d = KsDist(1.0)
    assert wasserstein_pmf_vs_ks(p, scale, d) <= _w1_between(p, q, scale) + wasserstein_pmf_vs_ks(q, scale, d) + 1e-10


def test_empirical_wasserstein_converges():
    i, n = 1, 20
    p = exact_pmf(UrnSpec.preferential(i, 1), n)
    b = math.sqrt(second_moment_white(i, n))
    d = KsDist(1.0)
    exact = wasserstein_pmf_vs_ks(p, b, d)
    rng = np.random.default_rng(0)
    errs = []
    for m in (10**4, 10**6):
        w = p.sample(rng, m) / b
        errs.append(abs(stats.wasserstein_distance(w, d.sample(rng, m)) - exact))
    assert errs[1] < errs[0] or errs[1] < 1e-3
    assert errs[1] <= 5e-3


def test_kolmogorov_helpers():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=5000), rng.normal(size=5000) + 0.3
    assert kolmogorov_two_sample(a, b) == pytest.approx(stats.ks_2samp(a, b).statistic)
    p = Pmf.from_dict({1: 0.5, 3: 0.5})
    assert kolmogorov_samples_vs_pmf(np.array([1, 1, 3, 3]), p) == 0.0
    assert kolmogorov_samples_vs_pmf(np.array([1, 1, 1, 3]), p) == pytest.approx(0.25)


def test_rate_fit_synthetic():
    ns = [64, 128, 256, 512]
    fit = rate_fit([(n, 2 / math.sqrt(n)) for n in ns])
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert np.allclose(fit.constants, 2.0)
    assert fit.constant_ratio == pytest.approx(1.0)
    assert rate_fit([(n, 1 / n) for n in ns]).slope == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(DomainError):
        rate_fit([(1, 1.0), (2, 0.0), (3, 0.5)])
    with pytest.raises(DomainError):
        rate_fit([(1, 1.0), (2, 0.5)])


def test_distance_report_and_csv():
    reps = [distance_report("urn", 1, n) for n in (8, 16)] + [distance_report("1", 2, 10), distance_report("2", 1, 10)]
    for r in reps:
        assert 0 <= r.kolmogorov <= 1 and r.wasserstein >= 0 and r.method == "exact_dp"
    assert reps[0].b == pytest.approx(math.sqrt(second_moment_white(1, 8)))
    text = reports_to_csv(reps)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert list(rows[0]) == ["model", "i", "n", "b", "kolmogorov", "wasserstein", "slope"]
    assert float(rows[0]["kolmogorov"]) == reps[0].kolmogorov
    assert rows[0]["slope"] == ""
    with pytest.raises(DomainError):
        DistanceReport("urn", 1, 4, 1.0, 1.5, 0.1)


def test_lower_bound_floor():
    # a floor c / sqrt(n) fitted on small n keeps holding at larger n
    small = [distance_report("urn", 1, n).kolmogorov * math.sqrt(n) for n in (32, 64)]
    c = 0.5 * min(small)
    assert c > 0.05
    for n in (256, 1024):
        assert distance_report("urn", 1, n).kolmogorov >= c / math.sqrt(n)
