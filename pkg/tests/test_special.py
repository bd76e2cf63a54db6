import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from padegree.errors import DomainError, UnsupportedParametersError
from padegree.special import (
    QuadratureConfig,
    kummer_u,
    kummer_u_deriv,
    log_gamma,
    log_kummer_u,
    sqrt_s_gamma_ratio,
)

mpmath.mp.dps = 30


def hyperu(a, b, z):
    return float(mpmath.hyperu(a, b, z, maxterms=10**6))


def quad_u(a, b, z):
    # integral representation, evaluated independently at high precision
    f = lambda t: mpmath.exp(-z * t) * t ** (a - 1) * (1 + t) ** (b - a - 1)
    return float(mpmath.quad(f, [0, 1, 10, mpmath.inf]) / mpmath.gamma(a))


def test_log_gamma_examples():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert log_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-13)
    assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_log_gamma_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(max_subdivisions=0)


def test_kummer_u_closed_forms():
    assert kummer_u(0.0, 0.5, 3.7) == 1.0
    assert kummer_u(-0.5, 0.5, 4.0) == pytest.approx(2.0, rel=1e-10)
    assert kummer_u(1.0, 0.5, 0.0) == pytest.approx(2.0, rel=1e-12)


def test_kummer_u_quadrature_example():
    assert kummer_u(1.5, 0.5, 2.0) == pytest.approx(quad_u(1.5, 0.5, 2.0), rel=1e-10)


@pytest.mark.parametrize("a", [1e-3, 0.1, 0.5, 1.0, 2.5, 10.0, 60.0, 200.0])
@pytest.mark.parametrize("b", [-0.5, 0.5, 1.5, 2.5])
@pytest.mark.parametrize("z", [1e-6, 0.01, 0.7, 5.0, 40.0, 1e3])
def test_kummer_u_matches_mpmath(a, b, z):
    assert kummer_u(a, b, z) == pytest.approx(hyperu(a, b, z), rel=1e-10)


@pytest.mark.parametrize("a", [-0.4, -0.25, -0.1])
@pytest.mark.parametrize("z", [0.05, 1.0, 9.0])
def test_kummer_u_negative_a_by_reflection(a, z):
    assert kummer_u(a, 0.5, z) == pytest.approx(hyperu(a, 0.5, z), rel=1e-10)


def test_kummer_u_rejects_unreachable_region():
    with pytest.raises(UnsupportedParametersError):
        kummer_u(-2.0, 2.5, 1.0)
    with pytest.raises(UnsupportedParametersError):
        kummer_u(1.0, 1.5, 0.0)
    with pytest.raises(DomainError):
        kummer_u(1.0, 0.5, -1.0)


@pytest.mark.parametrize("z", [1e-3, 30.0])
def test_log_kummer_u_beyond_float_range(z):
    # U(300, 1/2, z) underflows a double; its log does not
    ref = float(mpmath.log(mpmath.hyperu(300, 0.5, z, maxterms=10**6)))
    assert log_kummer_u(300.0, 0.5, z) == pytest.approx(ref, rel=1e-12)


def test_kummer_u_deriv_examples():
    assert kummer_u_deriv(0.0, 0.5, 2.0) == 0.0
    assert kummer_u_deriv(1.0, 0.5, 1.0) == pytest.approx(-hyperu(2.0, 1.5, 1.0), rel=1e-10)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.0, -0.5), (2.0, 0.5), (3.5, 1.5)])
@pytest.mark.parametrize("z", [0.3, 1.0, 4.0, 12.0])
def test_kummer_u_deriv_finite_difference(a, b, z):
    h = 1e-5 * z
    fd = (kummer_u(a, b, z + h) - kummer_u(a, b, z - h)) / (2 * h)
    assert abs(kummer_u_deriv(a, b, z) - fd) <= 1e-6 * max(1.0, abs(fd))


_grid_a = st.floats(min_value=0.05, max_value=8.0)
_grid_b = st.sampled_from([-0.5, 0.5, 1.5])
_grid_z = st.floats(min_value=0.01, max_value=20.0)


@settings(max_examples=60, deadline=None)
@given(_grid_a, _grid_b, _grid_z)
def test_recurrences(a, b, z):
    u = kummer_u(a, b, z)
    du = kummer_u_deriv(a, b, z)
    # (1 + a - b) U(a, b-1) = (1 - b) U - z U'
    lhs = (1 + a - b) * kummer_u(a, b - 1, z)
    rhs = (1 - b) * u - z * du
    assert abs(lhs - rhs) <= 1e-8 * max(abs(lhs), abs(u), z * abs(du))
    # U - U' = U(a, b+1)
    lhs = u - du
    assert abs(lhs - kummer_u(a, b + 1, z)) <= 1e-8 * abs(lhs)
    # U(a-1, b-1) = (1 - b + z) U - z U'; a - 1 may be negative, use mpmath there
    if a - 1 > 0:
        lhs = kummer_u(a - 1, b - 1, z)
    else:
        lhs = hyperu(a - 1, b - 1, z)
    rhs = (1 - b + z) * u - z * du
    assert abs(lhs - rhs) <= 1e-8 * max(abs(lhs), abs(1 - b + z) * u, z * abs(du))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_large_z_asymptotic(a):
    z = 1e4
    assert z ** a * kummer_u(a, 0.5, z) == pytest.approx(1.0, rel=0.05)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=6.0),
    st.floats(min_value=0.05, max_value=3.0),
    st.floats(min_value=0.05, max_value=15.0),
)
def test_monotone_in_a(a, gap, z):
    a2 = a + gap
    left = log_gamma(a) + log_kummer_u(a, 0.5, z)
    right = log_gamma(a2) + log_kummer_u(a2, 0.5, z)
    assert left > right


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.1, max_value=6.0), st.floats(min_value=0.05, max_value=15.0))
def test_monotone_in_b(a, z):
    assert kummer_u(a, -0.5, z) < kummer_u(a, 0.5, z) < kummer_u(a, 1.5, z)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (1.5, -0.5), (4.0, 0.5)])
@pytest.mark.parametrize("z", [0.2, 2.0, 8.0])
def test_exponential_derivative_identity(a, b, z):
    g = lambda t: math.exp(-t) * kummer_u(a, b, t)
    h = 1e-5
    fd = (g(z + h) - g(z - h)) / (2 * h)
    assert fd == pytest.approx(-math.exp(-z) * kummer_u(a, b + 1, z), abs=1e-6)


@pytest.mark.parametrize("s", [1.0, 1.01, 1.5, 2.0, 3.7, 10.0, 42.0, 100.0])
def test_gamma_ratio_bounds(s):
    r = sqrt_s_gamma_ratio(s)
    assert 1.0 < r <= math.sqrt(math.pi) + 1e-14
    ref = float(mpmath.sqrt(s) * mpmath.gamma(s - 0.5) / mpmath.gamma(s))
    assert r == pytest.approx(ref, rel=1e-13)
