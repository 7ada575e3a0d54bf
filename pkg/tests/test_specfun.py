from __future__ import annotations


import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from sntip.specfun import (AiryDomainError, AiryPoleError, airy, airy_ai, airy_ai_prime,
                           airy_first_zero, airy_log_ratio)

mpmath.mp.dps = 40


def test_ai_matches_mpmath_on_wide_grid():
    for x in np.linspace(-15.0, 10.0, 501):
        assert airy_ai(x) == pytest.approx(float(mpmath.airyai(x)), abs=1e-11, rel=1e-10)
        assert airy_ai_prime(x) == pytest.approx(float(mpmath.airyai(x, derivative=1)),
                                                 abs=1e-11, rel=1e-10)


def test_known_values_at_zero():
    assert airy_ai(0.0) == pytest.approx(0.355028053887817239, rel=1e-15)
    assert airy_ai_prime(0.0) == pytest.approx(-0.258819403792806798, rel=1e-15)


def test_first_zero():
    assert airy_first_zero() == pytest.approx(float(mpmath.airyaizero(1)), abs=1e-12)
    assert round(airy_first_zero(), 5) == -2.33811


def test_log_ratio_values():
    assert airy_log_ratio(0.0) == pytest.approx(0.7290111, abs=1e-7)
    # large x: -Ai'/Ai ~ sqrt(x) + 1/(4x)
    assert airy_log_ratio(9.0) == pytest.approx(3.0 + 1 / 36.0, abs=2e-3)


def test_pole_and_domain_errors():
    z1 = airy_first_zero()
    with pytest.raises(AiryPoleError) as ei:
        airy_log_ratio(z1)
    assert ei.value.nearest_zero == pytest.approx(z1)
    with pytest.raises(AiryDomainError):
        airy_ai(float("nan"))
    with pytest.raises(AiryDomainError):
        airy_ai(float("inf"))


def test_airy_eval_bundle():
    e = airy(1.5)
    assert e.ai == airy_ai(1.5) and e.ai_prime == airy_ai_prime(1.5)


@pytest.mark.parametrize("edge", [6.0, -7.0])
def test_branch_continuity(edge):
    lo, hi = np.nextafter(edge, -np.inf), np.nextafter(edge, np.inf)
    assert airy_ai(lo) == pytest.approx(airy_ai(hi), abs=1e-12, rel=1e-10)
    assert airy_ai_prime(lo) == pytest.approx(airy_ai_prime(hi), abs=1e-12, rel=1e-10)


@given(st.floats(-12.0, 8.0))
def test_derivative_consistent_with_values(x):
    # fourth-order stencil: a wide h keeps the ~1e-13 value noise below 1e-9
    h = 1e-3
    # a stencil straddling a method switch sees the ~1e-12 branch mismatch
    assume(abs(x - 6.0) > 2 * h and abs(x + 7.0) > 2 * h)
    fd = (8 * (airy_ai(x + h) - airy_ai(x - h)) - (airy_ai(x + 2 * h) - airy_ai(x - 2 * h))) / (12 * h)
    assert fd == pytest.approx(airy_ai_prime(x), abs=1e-8)


@given(st.floats(-12.0, 8.0))
def test_airy_equation(x):
    # Ai'' = x Ai, checked on Ai'
    h = 1e-3
    assume(abs(x - 6.0) > 2 * h and abs(x + 7.0) > 2 * h)
    fd = (8 * (airy_ai_prime(x + h) - airy_ai_prime(x - h))
          - (airy_ai_prime(x + 2 * h) - airy_ai_prime(x - 2 * h))) / (12 * h)
    assert fd == pytest.approx(x * airy_ai(x), abs=1e-7)


@given(st.floats(-2.3, 20.0))
def test_log_ratio_is_minus_logderivative(x):
    assert airy_log_ratio(x) == pytest.approx(-airy_ai_prime(x) / airy_ai(x), rel=1e-12)
