import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from padegree.errors import DomainError, UnsupportedParametersError
from padegree.ks import KsDist
from padegree.metrics import kolmogorov_two_sample

S_GRID = [0.5, 0.75, 1.0, 1.5, 2.5, 10.0]


def quad(fn, a, b):
    val, _ = integrate.quad(fn, a, b, epsabs=1e-14, epsrel=1e-13, limit=500)
    return val


def test_rejects_small_s():
    with pytest.raises(DomainError):
        KsDist(0.4)


def test_density_examples():
    assert KsDist(0.5).density(1.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)
    assert KsDist(1.0).density(0.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    with pytest.raises(DomainError):
        KsDist(2.0).density(-0.1)


@pytest.mark.parametrize("s", S_GRID + [200.0])
def test_density_normalization(s):
    d = KsDist(s)
    assert quad(d.density, 0, 5) + quad(d.density, 5, np.inf) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("s", [0.75, 1.5, 3.0])
def test_general_density_against_mpmath(s):
    import mpmath

    d = KsDist(s)
    for x in (0.1, 1.0, 2.7):
        z = x * x / (2 * s)
        c = math.sqrt(2 / (s * math.pi)) * math.gamma(s)
        ref = c * math.exp(-z) * float(mpmath.hyperu(s - 1, 0.5, z))
        assert d.density(x) == pytest.approx(ref, rel=1e-10)


def test_survival_examples():
    assert KsDist(0.5).survival(1.0) == pytest.approx(math.exp(-1), rel=1e-14)
    for s in S_GRID:
        assert KsDist(s).survival(0.0) == pytest.approx(1.0, abs=1e-12)
    d = KsDist(3.0)
    assert d.survival(1.3) == pytest.approx(quad(d.density, 1.3, np.inf), abs=1e-8)


@pytest.mark.parametrize("s", S_GRID)
@pytest.mark.parametrize("x", [0.05, 0.5, 1.7, 4.0])
def test_survival_against_quadrature(s, x):
    d = KsDist(s)
    assert d.survival(x) == pytest.approx(quad(d.density, x, np.inf), abs=1e-9)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.5])
def test_cdf_small_x_relative_accuracy(s):
    d = KsDist(s)
    x = 1e-5
    assert d.cdf(x) == pytest.approx(quad(d.density, 0, x), rel=1e-6)


@pytest.mark.parametrize("s", S_GRID)
def test_partial_moment_and_integrated_survival(s):
    d = KsDist(s)
    for x in (0.3, 1.2, 3.0):
        assert d.partial_first_moment(x) == pytest.approx(quad(lambda t: t * d.density(t), x, np.inf), abs=1e-9)
        assert d.integrated_survival(x) == pytest.approx(quad(d.survival, 0, x), abs=1e-9)


def test_quantile_examples():
    assert KsDist(0.5).quantile(1 - math.exp(-1)) == pytest.approx(1.0, abs=1e-10)
    assert KsDist(1.0).quantile(0.5) == pytest.approx(0.6744897501960817, abs=1e-10)
    with pytest.raises(DomainError):
        KsDist(1.0).quantile(1.0)


@pytest.mark.parametrize("s", [0.5, 0.75, 2.0, 7.0])
def test_quantile_round_trip(s):
    d = KsDist(s)
    for p in np.linspace(0.01, 0.99, 15):
        assert d.cdf(d.quantile(p)) == pytest.approx(p, abs=1e-9)
    for x in (0.2, 0.9, 2.2):
        assert d.quantile(d.cdf(x)) == pytest.approx(x, abs=1e-8)


def test_moment_examples():
    for s in S_GRID:
        assert KsDist(s).moment(2.0) == pytest.approx(1.0, rel=1e-14)
        assert KsDist(s).moment(0.0) == pytest.approx(1.0, rel=1e-14)
    assert KsDist(1.0).moment(1.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    with pytest.raises(DomainError):
        KsDist(1.0).moment(-1.0)


@pytest.mark.parametrize("s", [0.5, 0.75, 1.0, 2.5, 10.0])
@pytest.mark.parametrize("r", [-0.5, 1.0, 3.0, 4.5])
def test_moment_against_quadrature(s, r):
    d = KsDist(s)
    f = lambda x: x ** r * d.density(x)
    assert d.moment(r) == pytest.approx(quad(f, 0, 1) + quad(f, 1, np.inf), rel=1e-8)


def test_sample_half_is_sqrt_exponential():
    rng = np.random.default_rng(1)
    z = KsDist(0.5).sample(rng, 200_000)
    assert stats.kstest(z ** 2, "expon").pvalue > 1e-3


def test_sample_one_mean():
    z = KsDist(1.0).sample(np.random.default_rng(2), 10**6)
    assert abs(z.mean() - math.sqrt(2 / math.pi)) <= 0.003


@pytest.mark.parametrize("s", S_GRID)
def test_sample_moments(s):
    d = KsDist(s)
    z = d.sample(np.random.default_rng([3, int(100 * s)]), 10**6)
    for r in (1, 2, 3, 4):
        zr = z ** r
        se = zr.std() / math.sqrt(z.size)
        assert abs(zr.mean() - d.moment(r)) <= 4 * se


@pytest.mark.parametrize("s", S_GRID)
def test_sample_square_bias_moments(s):
    d = KsDist(s)
    z = d.sample_square_bias(np.random.default_rng([4, int(100 * s)]), 10**6)
    for r in (1, 2, 3):
        zr = z ** r
        se = zr.std() / math.sqrt(z.size)
        # E W^2 = 1, so E (Z'')^r = E Z^{r+2}
        assert abs(zr.mean() - d.moment(r + 2)) <= 3 * se


def test_square_bias_half_is_sqrt_gamma2():
    rng = np.random.default_rng(5)
    z = KsDist(0.5).sample_square_bias(rng, 200_000)
    assert stats.kstest(z ** 2, stats.gamma(2).cdf).pvalue > 1e-3


@pytest.mark.parametrize("s", [0.75, 1.0, 3.0])
def test_square_bias_against_rejection(s):
    d = KsDist(s)
    rng = np.random.default_rng([6, int(100 * s)])
    cap = d.quantile(1 - 1e-7)
    acc = []
    while sum(a.size for a in acc) < 100_000:
        z = d.sample(rng, 1_000_000)
        acc.append(z[rng.random(z.size) < np.minimum((z / cap) ** 2, 1.0)])
    ref = np.concatenate(acc)[:100_000]
    assert kolmogorov_two_sample(ref, d.sample_square_bias(rng, 100_000)) <= 0.01


def test_mills_ratio():
    d1 = KsDist(1.0)
    ref = quad(d1.density, 1.0, np.inf) / d1.density(1.0)
    assert d1.mills_ratio(1.0) == pytest.approx(ref, rel=1e-9)
    # Gaussian tail: ratio * x -> 1
    assert d1.mills_ratio(30.0) * 30.0 == pytest.approx(1.0, abs=2e-3)
    d2 = KsDist(2.0)
    for x in np.linspace(0.1, 10, 100):
        assert d2.mills_ratio(x) <= min(math.sqrt(math.pi / 2), 2 / x)
    with pytest.raises(UnsupportedParametersError):
        KsDist(0.75).mills_ratio(1.0)


def test_large_s_exponential_limit():
    d = KsDist(200.0)
    xs = np.linspace(0.0, 8.0, 400)
    gap = np.max(np.abs(d.cdf(xs) - (1 - np.exp(-math.sqrt(2) * xs))))
    assert gap <= 0.02


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.5, max_value=30.0), st.floats(min_value=0.0, max_value=6.0), st.floats(min_value=0.01, max_value=2.0))
def test_survival_decreasing(s, x, dx):
    d = KsDist(s)
    assert d.survival(x + dx) < d.survival(x)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.0, max_value=30.0), st.floats(min_value=0.0, max_value=6.0), st.floats(min_value=0.01, max_value=2.0))
def test_density_nonincreasing_above_one(s, x, dx):
    d = KsDist(s)
    assert d.density(x + dx) <= d.density(x) * (1 + 1e-12)
    assert d.density(0.0) <= math.sqrt(2.0)
