import math
import sys
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupledosc import specfun


def exact_binom(x: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= x - i
    return out / math.factorial(j)


def exact_jacobi(k, a, b, x) -> Fraction:
    x = Fraction(x)
    return sum(exact_binom(Fraction(k + a), j) * exact_binom(Fraction(k + b), k - j)
               * ((x - 1) / 2) ** (k - j) * ((x + 1) / 2) ** j for j in range(k + 1))


def jacobi_recurrence(k, a, b, x):
    p0, p1 = 1.0, (a + 1) + (a + b + 2) * (x - 1) / 2
    if k == 0:
        return p0
    for n in range(2, k + 1):
        c = 2 * n + a + b
        a1 = 2 * n * (n + a + b) * (c - 2)
        a2 = (c - 1) * (a * a - b * b)
        a3 = (c - 1) * c * (c - 2)
        a4 = 2 * (n + a - 1) * (n + b - 1) * c
        p0, p1 = p1, ((a2 + a3 * x) * p1 - a4 * p0) / a1
    return p1


def test_log_factorial_small():
    assert specfun.log_factorial(0) == 0.0
    assert specfun.log_factorial(5) == pytest.approx(math.log(120), abs=0)


def test_log_factorial_large_against_log_sum():
    ref = math.fsum(math.log(k) for k in range(1, 171))
    assert specfun.log_factorial(170) == pytest.approx(ref, rel=1e-12)


def test_log_factorial_rejects_negative():
    with pytest.raises(ValueError):
        specfun.log_factorial(-1)


def test_log_gamma_half():
    assert specfun.log_gamma_half(1) == pytest.approx(0.5 * math.log(math.pi))
    assert specfun.log_gamma_half(5) == pytest.approx(math.log(3 * math.sqrt(math.pi) / 4))
    g = math.sqrt(math.pi)
    for j in range(20):
        g *= j + 0.5
    assert specfun.log_gamma_half(41) == pytest.approx(math.log(g), rel=1e-13)
    assert specfun.log_gamma_half(8) == pytest.approx(math.log(6))


def test_jacobi_degree_zero_and_one():
    assert specfun.jacobi(0, -3.0, 2.0, 7.5).value == 1.0
    for a, b, x in ((-4, 1, 0.3), (0.5, 2, -2.0), (-7, -2, 11.0)):
        assert specfun.jacobi(1, a, b, x).value == pytest.approx((a + 1) + (a + b + 2) * (x - 1) / 2)


def test_jacobi_pinned_rational():
    exact = exact_jacobi(2, -3, 0, -3)
    assert exact == Fraction(1)
    assert specfun.jacobi(2, -3.0, 0.0, -3.0).value == pytest.approx(float(exact), abs=1e-15)


@settings(max_examples=150)
@given(st.integers(0, 25), st.integers(-30, 10), st.integers(-5, 10),
       st.fractions(-4, 4, max_denominator=16))
def test_jacobi_matches_exact_rational_sum(k, a, b, x):
    ref = exact_jacobi(k, a, b, x)
    got = specfun.jacobi(k, float(a), float(b), float(x)).value
    scale = float(sum(abs(exact_binom(Fraction(k + a), j) * exact_binom(Fraction(k + b), k - j))
                      * abs((x - 1) / 2) ** (k - j) * abs((x + 1) / 2) ** j for j in range(k + 1)))
    assert abs(got - float(ref)) <= 1e-13 * max(scale, 1.0)


@settings(max_examples=150)
@given(st.integers(0, 30), st.floats(-0.9, 5.0), st.floats(-0.9, 5.0), st.floats(-1.0, 1.0))
def test_jacobi_matches_recurrence(k, a, b, x):
    ref = jacobi_recurrence(k, a, b, x)
    got = specfun.jacobi(k, a, b, x).value
    # the explicit sum cancels; measure against the sum of term magnitudes
    scale = sum(abs(float(specfun.log_binom(k + a, j).value) * specfun.log_binom(k + b, k - j).value)
                * abs((x - 1) / 2) ** (k - j) * abs((x + 1) / 2) ** j for j in range(k + 1))
    assert abs(got - ref) <= 1e-12 * max(scale, 1.0)


def test_jacobi_beyond_double_range():
    # all terms positive: well conditioned, but the value overflows a double
    v = specfun.jacobi(100, 2.0, 3.0, 1e4)
    ref = exact_jacobi(100, 2, 3, 10000)
    log_ref = math.log(ref.numerator) - math.log(ref.denominator)
    assert v.sign == 1 and log_ref > math.log(sys.float_info.max)
    assert v.log_magnitude == pytest.approx(log_ref, rel=1e-13)


def test_gauss_2f1_examples():
    assert specfun.gauss_2f1_terminating(0, 3.3) == 1.0
    assert specfun.gauss_2f1_terminating(1, 0.4) == pytest.approx(1.4)
    assert specfun.gauss_2f1_terminating(3, 1.0) == 20.0


@pytest.mark.parametrize("s", range(16))
def test_gauss_2f1_vandermonde(s):
    assert specfun.gauss_2f1_terminating(s, 1.0) == math.comb(2 * s, s)


@pytest.mark.parametrize("s,z", [(5, 0.3), (12, 2.5), (30, 0.99), (40, 17.0)])
def test_gauss_2f1_against_mpmath(s, z):
    ref = float(mpmath.hyp2f1(-s, -s, 1, z))
    assert specfun.gauss_2f1_terminating(s, z) == pytest.approx(ref, rel=1e-13)
    assert specfun.log_gauss_2f1_terminating(s, z) == pytest.approx(math.log(ref), rel=1e-13)


def exact_4f3(s: int) -> Fraction:
    def poch(x, n):
        out = Fraction(1)
        for i in range(n):
            out *= x + i
        return out
    h = Fraction(1, 2)
    return sum(poch(h, n) ** 2 * poch(Fraction(-s), n) ** 2
               / (poch(Fraction(1), n) * poch(h - s, n) ** 2 * math.factorial(n)) for n in range(s + 1))


def test_4f3_small():
    assert specfun.genhyp_4f3_hb(0) == 1.0
    assert specfun.genhyp_4f3_hb(1) == pytest.approx(2.0)
    assert specfun.genhyp_4f3_hb(2) == pytest.approx(float(exact_4f3(2)), rel=1e-15)


@pytest.mark.parametrize("s", [3, 7, 15, 30, 60])
def test_4f3_exact_rational(s):
    assert specfun.genhyp_4f3_hb(s) == pytest.approx(float(exact_4f3(s)), rel=1e-13)


def test_signed_log_sum_cancellation_and_zero():
    a = specfun.SignedLogValue.from_float(3.5)
    b = specfun.SignedLogValue.from_float(-3.5)
    assert specfun.signed_log_sum([a, b]).sign == 0
    assert specfun.signed_log_sum([]).value == 0.0
    big = specfun.SignedLogValue(800.0, 1)
    assert specfun.signed_log_sum([big, big]).log_magnitude == pytest.approx(800.0 + math.log(2.0))


@settings(max_examples=300)
@given(st.floats(-1e10, 1e10).filter(lambda v: v == 0.0 or abs(v) > 1e-100),
       st.floats(-1e10, 1e10).filter(lambda v: v == 0.0 or abs(v) > 1e-100))
def test_two_sum_and_two_prod_are_error_free(a, b):
    s, e = specfun.two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)
    p, f = specfun.two_prod(a, b)
    assert Fraction(p) + Fraction(f) == Fraction(a) * Fraction(b)


def test_dd_reciprocal():
    h, l = specfun.dd_reciprocal(3.0)
    err = Fraction(h) + Fraction(l) - Fraction(1, 3)
    assert abs(float(err)) < 1e-31


def test_int_to_dd_carries_big_integers():
    v = 3 ** 60 + 7
    hi, lo = specfun.int_to_dd([v, -v])
    assert int(Fraction(hi[0]) + Fraction(lo[0])) == v
    assert int(Fraction(hi[1]) + Fraction(lo[1])) == -v


def test_horner_dd_cancelling_polynomial():
    # (1 - x)^20 near x = 1 in expanded form cancels catastrophically in doubles
    coeffs = [(-1) ** j * math.comb(20, j) for j in range(21)]
    hi, lo = specfun.int_to_dd(coeffs)
    x = Fraction(9, 10)
    xh, xl = specfun.two_sum(float(x), 0.0)
    got = specfun.horner_dd(hi, lo, xh, xl)
    xf = Fraction(float(x))
    ref = float(sum(Fraction(c) * xf ** j for j, c in enumerate(coeffs)))
    assert got == pytest.approx(ref, rel=1e-10)
    naive = float(np.polyval(np.array(coeffs[::-1], dtype=float), float(x)))
    assert abs(naive - ref) > abs(got - ref)
