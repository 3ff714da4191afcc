import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credit_contagion.errors import DomainError
from credit_contagion.special_functions import (
    bessel_i_integral_form,
    bessel_i_scaled,
    integral_form_kernel,
)


def series_oracle(nu, x, terms=80, dps=60):
    """exp(-x) I_nu(x) from the Maclaurin series in extended precision."""
    with mpmath.workdps(dps):
        nu_m, h = mpmath.mpf(nu), mpmath.mpf(x) / 2
        total = mpmath.fsum(h ** (2 * k + nu_m) / (mpmath.factorial(k) * mpmath.gamma(k + nu_m + 1)) for k in range(terms))
        return float(total * mpmath.exp(-mpmath.mpf(x)))


def mp_scaled(nu, x, dps=40):
    with mpmath.workdps(dps):
        return float(mpmath.besseli(nu, x) * mpmath.exp(-mpmath.mpf(x)))


def test_zero_order_at_origin():
    assert bessel_i_scaled(0.0, 0.0) == 1.0
    assert bessel_i_scaled(2.5, 0.0) == 0.0
    assert bessel_i_integral_form(0.0, 0.0) == 1.0


def test_half_order_closed_form():
    expected = math.exp(-2.0) * math.sqrt(2.0 / (2.0 * math.pi)) * math.sinh(2.0)
    assert bessel_i_scaled(0.5, 2.0) == pytest.approx(expected, rel=1e-13)


def test_order_one_against_series():
    assert bessel_i_scaled(1.0, 2.0) == pytest.approx(series_oracle(1.0, 2.0), rel=1e-13)


def test_small_argument_leading_term():
    nu, x = 3.7, 1e-4
    lead = math.exp(-x) * (x / 2) ** nu / math.gamma(nu + 1)
    assert bessel_i_scaled(nu, x) == pytest.approx(lead, rel=1e-8)


@pytest.mark.parametrize(
    "nu,x",
    [(0.0, 1e4), (1.3, 5e3), (17.5, 40.0), (75.0, 10.0), (150.7, 400.0), (200.0, 1e4), (200.0, 3.0)],
)
def test_scaled_accuracy_wide_range(nu, x):
    assert bessel_i_scaled(nu, x) == pytest.approx(mp_scaled(nu, x), rel=1e-10)


def test_array_broadcast():
    nu = np.array([0.0, 1.0, 2.0])
    out = bessel_i_scaled(nu, 2.0)
    assert out.shape == (3,)
    assert out[1] == pytest.approx(series_oracle(1.0, 2.0), rel=1e-13)


@pytest.mark.parametrize("nu,x", [(-0.5, 1.0), (1.0, -1.0), (math.nan, 1.0), (1.0, math.inf)])
def test_domain_errors(nu, x):
    with pytest.raises(DomainError):
        bessel_i_scaled(nu, x)
    with pytest.raises(DomainError):
        bessel_i_integral_form(nu, x)


def test_integral_form_order_two():
    assert bessel_i_integral_form(2.0, 5.0) == pytest.approx(bessel_i_scaled(2.0, 5.0), rel=1e-8)


def test_integral_form_order_pi_against_series():
    assert bessel_i_integral_form(math.pi, 1.0) == pytest.approx(series_oracle(math.pi, 1.0), rel=1e-10)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.59, math.pi, 12.25, 25.5, 50.0])
@pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 5.0, 30.0, 100.0])
def test_two_routes_agree(nu, x):
    assert bessel_i_integral_form(nu, x) == pytest.approx(bessel_i_scaled(nu, x), rel=1e-8)


def test_kernel_integrates_to_scaled_bessel():
    from scipy.integrate import quad

    for nu, x in [(1.59, 2.0), (4.8, 0.7), (3.0, 10.0)]:
        val, _ = quad(lambda w: float(integral_form_kernel(nu, x, w)), 0.0, 1.0, limit=200, epsabs=1e-14)
        assert val == pytest.approx(bessel_i_scaled(nu, x), rel=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 200.0), st.floats(1e-6, 1e4))
def test_scaled_positive_and_bounded(nu, x):
    v = bessel_i_scaled(nu, x)
    assert 0.0 <= v <= 1.0
    # positive whenever the exact value is a normal double
    lead = nu * math.log(x / 2) - math.lgamma(nu + 1) - x
    if lead > -700:
        assert v > 0.0


def test_underflow_recovered_from_series():
    assert bessel_i_scaled(149.0, 1.0) == pytest.approx(mp_scaled(149.0, 1.0), rel=1e-12)
    assert bessel_i_scaled(np.array([149.0, 1.0]), 1.0)[0] > 0.0


@pytest.mark.parametrize("x", [0.1, 1.0, 10.0, 100.0, 1000.0])
def test_monotone_decay_in_order(x):
    vals = bessel_i_scaled(np.linspace(0.0, 60.0, 241), x)
    assert np.all(np.diff(vals) <= 0.0)


@pytest.mark.parametrize("x", [0.1, 0.9, 4.0, 25.0, 100.0])
@pytest.mark.parametrize("nu", [1.0, 1.5, 3.3, 10.0, 27.1, 50.0])
def test_recurrence(nu, x):
    lhs = bessel_i_scaled(nu - 1.0, x) - bessel_i_scaled(nu + 1.0, x)
    rhs = 2.0 * nu / x * bessel_i_scaled(nu, x)
    assert lhs == pytest.approx(rhs, rel=1e-8)
