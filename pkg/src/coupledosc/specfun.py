"""Special functions for the closed-form amplitudes and entanglement formulas.

Factorial ratios and Pochhammer products are carried as ``(log|x|, sign)``
pairs so that degrees near 60 (and up to 100 for :func:`jacobi`) never
overflow. Alternating polynomial sums that cancel heavily are evaluated
with a compensated (double-double) Horner scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EXACT_FACTORIAL_MAX = 20
_LOG_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class SignedLogValue:
    log_magnitude: float
    sign: int

    @classmethod
    def from_float(cls, x: float) -> "SignedLogValue":
        if x == 0.0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue(-math.inf, 0)
        return SignedLogValue(self.log_magnitude + other.log_magnitude, self.sign * other.sign)


ZERO = SignedLogValue(-math.inf, 0)
ONE = SignedLogValue(0.0, 1)


def log_factorial(n: int) -> float:
    if n < 0 or int(n) != n:
        raise ValueError(f"log_factorial needs a nonnegative integer, got {n!r}")
    n = int(n)
    if n <= _EXACT_FACTORIAL_MAX:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1.0)


def log_gamma_half(n2: int) -> float:
    """``ln Gamma(n2 / 2)`` for a positive integer ``n2``."""
    if n2 <= 0 or int(n2) != n2:
        raise ValueError(f"n2 must be a positive integer, got {n2!r}")
    n2 = int(n2)
    if n2 % 2 == 0:
        return log_factorial(n2 // 2 - 1)
    # Gamma(j + 1/2) = (2j)! sqrt(pi) / (4^j j!)
    j = (n2 - 1) // 2
    return log_factorial(2 * j) - j * math.log(4.0) - log_factorial(j) + _LOG_SQRT_PI


def log_binom(x: float, j: int) -> SignedLogValue:
    """Generalized binomial ``x (x-1) ... (x-j+1) / j!`` in signed-log form.

    Negative integer ``x`` is fine: the falling factorial has no poles.
    """
    if j < 0:
        return ZERO
    log_mag = 0.0
    sign = 1
    for i in range(j):
        f = x - i
        if f == 0.0:
            return ZERO
        if f < 0:
            sign = -sign
        log_mag += math.log(abs(f))
    return SignedLogValue(log_mag - log_factorial(j), sign)


def signed_log_sum(terms) -> SignedLogValue:
    """Sum signed-log terms without overflow (shift by the largest term)."""
    terms = [t for t in terms if t.sign != 0]
    if not terms:
        return ZERO
    shift = max(t.log_magnitude for t in terms)
    total = math.fsum(t.sign * math.exp(t.log_magnitude - shift) for t in terms)
    if total == 0.0:
        return ZERO
    return SignedLogValue(shift + math.log(abs(total)), 1 if total > 0 else -1)


def jacobi(k: int, a: float, b: float, x: float) -> SignedLogValue:
    """Jacobi polynomial ``P_k^{(a,b)}(x)`` from its terminating sum.

    ``sum_j C(k+a, j) C(k+b, k-j) ((x-1)/2)^(k-j) ((x+1)/2)^j`` with
    falling-factorial binomials, valid for negative integer ``a`` or ``b``.
    Accurate when the sum is well conditioned; for the heavily cancelling
    arguments of the oscillator coefficients use
    :func:`coupledosc.dynamics.coefficient_matrix` instead.
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    xm = SignedLogValue.from_float(0.5 * (x - 1.0))
    xp = SignedLogValue.from_float(0.5 * (x + 1.0))
    terms = []
    for j in range(k + 1):
        t = log_binom(k + a, j) * log_binom(k + b, k - j)
        if t.sign == 0:
            continue
        t = t * _pow(xm, k - j) * _pow(xp, j)
        terms.append(t)
    return signed_log_sum(terms)


def _pow(v: SignedLogValue, e: int) -> SignedLogValue:
    if e == 0:
        return ONE
    if v.sign == 0:
        return ZERO
    return SignedLogValue(e * v.log_magnitude, v.sign if e % 2 else 1)


def gauss_2f1_terminating(s: int, z: float) -> float:
    """``2F1(-s, -s; 1; z) = sum_n C(s, n)^2 z^n``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return math.fsum(math.comb(s, n) ** 2 * z ** n for n in range(s + 1))


def log_gauss_2f1_terminating(s: int, z: float) -> float:
    """Logarithm of :func:`gauss_2f1_terminating` for ``z >= 0``, overflow-free."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if z < 0:
        raise ValueError("log form needs z >= 0")
    if z == 0.0:
        return 0.0
    lz = math.log(z)
    terms = [SignedLogValue(2.0 * _log_comb(s, n) + n * lz, 1) for n in range(s + 1)]
    return signed_log_sum(terms).log_magnitude


def _log_comb(n: int, k: int) -> float:
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k)


def _log_pochhammer(x: float, n: int) -> SignedLogValue:
    log_mag = 0.0
    sign = 1
    for i in range(n):
        f = x + i
        if f == 0.0:
            return ZERO
        if f < 0:
            sign = -sign
        log_mag += math.log(abs(f))
    return SignedLogValue(log_mag, sign)


def log_genhyp_4f3_hb(s: int) -> SignedLogValue:
    """``4F3(1/2, 1/2, -s, -s; 1, 1/2-s, 1/2-s; 1)`` in signed-log form."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    terms = []
    for n in range(s + 1):
        num = _log_pochhammer(0.5, n) * _log_pochhammer(0.5, n)
        num = num * _log_pochhammer(-s, n) * _log_pochhammer(-s, n)
        den = _log_pochhammer(0.5 - s, n)
        # (1/2 - s)_n has factors 1/2 - s + i, i < n <= s: never zero
        assert den.sign != 0
        log_den = 2.0 * den.log_magnitude + 2.0 * log_factorial(n)
        terms.append(SignedLogValue(num.log_magnitude - log_den, num.sign))
    return signed_log_sum(terms)


def genhyp_4f3_hb(s: int) -> float:
    return log_genhyp_4f3_hb(s).value


# -- double-double arithmetic (elementwise on numpy arrays or floats) --------

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    e = e + (al + bl)
    return two_sum(s, e)


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return two_sum(p, e)


def dd_reciprocal(xh, xl=0.0):
    """``1/x`` as a double-double (one Newton step)."""
    yh = 1.0 / xh
    ph, pl = dd_mul(xh, xl, yh, 0.0)
    rh, rl = dd_add(1.0, 0.0, -ph, -pl)
    return two_sum(yh, (rh + rl) * yh)


def int_to_dd(values):
    """Split Python integers into ``(hi, lo)`` float arrays carrying ~106 bits."""
    hi = np.array([float(v) for v in values], dtype=float)
    lo = np.array([float(v - int(h)) for v, h in zip(values, hi)], dtype=float)
    return hi, lo


def horner_dd(c_hi, c_lo, xh, xl):
    """Evaluate ``sum_j c_j x^j`` in double-double precision.

    Coefficients run along the last axis in ascending degree; leading axes
    broadcast, so many polynomials are evaluated at once.
    """
    c_hi = np.asarray(c_hi, dtype=float)
    c_lo = np.asarray(c_lo, dtype=float)
    rh = c_hi[..., -1]
    rl = c_lo[..., -1]
    for j in range(c_hi.shape[-1] - 2, -1, -1):
        rh, rl = dd_mul(rh, rl, xh, xl)
        rh, rl = dd_add(rh, rl, c_hi[..., j], c_lo[..., j])
    return rh + rl
