import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from salpeter_bounds.errors import DomainError
from salpeter_bounds.special import (
    AIRY_FIRST_ZERO,
    airy_first_zero,
    bessel_k1,
    gamma,
    scaled_exp_k1,
)


def k1_quadrature(z, dps=25):
    """K1(z) = int_0^inf exp(-z cosh t) cosh t dt, by mpmath tanh-sinh."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        t_max = mpmath.acosh(1 + 80 / z)
        pts = [t_max * k / 16 for k in range(17)]
        return mpmath.quad(lambda t: mpmath.exp(-z * mpmath.cosh(t)) * mpmath.cosh(t), pts)


# Frozen from k1_quadrature at 25 digits.
K1_TABLE = [
    (1e-8, 99999999.999999903),
    (1e-4, 9999.9995086864045),
    (0.1, 9.8538447808706056),
    (0.5, 1.6564411200033009),
    (1.0, 0.60190723019723457),
    (1.5, 0.27738780045684382),
    (2.0, 0.13986588181652243),
    (2.0001, 0.13984750046881139),
    (3.0, 0.040156431128194184),
    (10.0, 1.8648773453825585e-5),
    (50.0, 3.4441022267176816e-23),
    (300.0, 3.7298958583325092e-132),
    (700.0, 4.6731107967081371e-306),
]


@pytest.mark.parametrize("z,expected", K1_TABLE)
def test_bessel_k1_table(z, expected):
    assert bessel_k1(z) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("z", [0.3, 1.0, 2.5, 17.0])
def test_bessel_k1_against_live_quadrature(z):
    assert bessel_k1(z) == pytest.approx(float(k1_quadrature(z)), rel=1e-12)


def test_bessel_k1_spec_examples():
    assert bessel_k1(1.0) == pytest.approx(0.6019072301972346, rel=1e-10)
    assert bessel_k1(10.0) == pytest.approx(1.8648773453708224e-5, rel=1e-10)


@pytest.mark.parametrize("z", [1e-12, 1e-8, 1e-5, 1e-3])
def test_small_argument_limit(z):
    assert abs(z * bessel_k1(z) - 1.0) <= 0.01


def test_monotone_decreasing_and_positive():
    z = np.geomspace(1e-6, 700, 2000)
    k = np.array([bessel_k1(v) for v in z])
    assert np.all(k > 0)
    assert np.all(np.diff(k) < 0)


def test_scaled_examples():
    assert scaled_exp_k1(1.0) == pytest.approx(1.6361534862632582, rel=1e-12)
    assert scaled_exp_k1(1e8) == pytest.approx(math.sqrt(math.pi / 2e8), rel=1e-7)
    assert scaled_exp_k1(1e-8) == pytest.approx(1e8, rel=1e-6)
    assert scaled_exp_k1(1e12) == pytest.approx(math.sqrt(math.pi / 2e12), rel=1e-12)
    assert scaled_exp_k1(1e-12) == pytest.approx(1e12, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=700.0))
def test_scaled_consistent_with_plain(z):
    s = scaled_exp_k1(z)
    assert abs(s - math.exp(z) * bessel_k1(z)) / s <= 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.5, max_value=50.0))
def test_gamma_recursion(x):
    assert gamma(x + 1) == pytest.approx(x * gamma(x), rel=1e-11)


def test_gamma_values():
    assert gamma(2.5) == pytest.approx(3 * math.sqrt(math.pi) / 4, rel=1e-12)
    assert gamma(3.0) == pytest.approx(2.0, rel=1e-12)
    assert gamma(2.75) == pytest.approx(1.6083594219855498, rel=1e-12)
    assert gamma(2.75) == pytest.approx(float(mpmath.gamma(2.75)), rel=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_k1(bad)
    with pytest.raises(DomainError):
        scaled_exp_k1(bad)
    with pytest.raises(DomainError):
        gamma(bad)


def test_airy_zero():
    assert airy_first_zero() == AIRY_FIRST_ZERO
    assert airy_first_zero() == pytest.approx(2.33810741, abs=5e-9)
    assert abs(float(mpmath.airyai(-airy_first_zero()))) < 1e-8
