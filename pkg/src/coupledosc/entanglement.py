"""Entanglement measures and the closed-form special cases.

Entropies are in nats. Everything here depends on the initial quantum
numbers and the reflection coefficient ``R`` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from . import specfun
from .dynamics import (InitialState, SchmidtSpectrum, amplitudes, coefficient_matrix,
                       mixing)
from .model import point_from_R

CLOSED_FORM_CASES = frozenset({(1, 1), (0, 2), (2, 0), (2, 2)})

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class UnsupportedCaseError(ValueError):
    """No explicit closed form exists for this pair of quantum numbers."""


@dataclass(frozen=True)
class EntanglementReport:
    S_N: float
    K: float
    R: float
    s1: int
    s2: int


def _lam(spectrum) -> np.ndarray:
    if isinstance(spectrum, SchmidtSpectrum):
        return spectrum.lam
    return np.asarray(spectrum, dtype=float)


def von_neumann(lam) -> float:
    """``-sum lam ln lam`` with ``0 ln 0 = 0``."""
    lam = _lam(lam)
    return 0.0 - float(np.sum(xlogy(lam, lam)))


def schmidt_number(lam) -> float:
    lam = _lam(lam)
    return float(1.0 / np.sum(lam * lam))


def report(s1: int, s2: int, R: float, epsilon: float = 0.0) -> EntanglementReport:
    """Entanglement at ``R`` through the general closed-form pipeline."""
    lam = spectrum_grid(s1, s2, np.array([R]), epsilon)[0]
    return EntanglementReport(von_neumann(lam), schmidt_number(lam), R, s1, s2)


def closed_form(s1: int, s2: int, R: float) -> EntanglementReport:
    """Explicit expressions for the four smallest nontrivial cases."""
    if (s1, s2) not in CLOSED_FORM_CASES:
        raise UnsupportedCaseError(f"no closed form for ({s1}, {s2}); use the general pipeline")
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"R must lie in [0, 1], got {R!r}")
    q = R * (1.0 - R)
    if (s1, s2) == (1, 1):
        x = (1.0 - 2.0 * R) ** 2
        S = -xlogy(x, x) - 2.0 * xlogy(2.0 * q, 2.0 * q)
        K = 1.0 / (1.0 - 8.0 * q * (1.0 - 3.0 * q))
    elif (s1, s2) in ((0, 2), (2, 0)):
        S = (2.0 * (R - 1.0) * R * math.log(2.0) - 2.0 * xlogy(1.0 - R, 1.0 - R)
             - 2.0 * xlogy(R, R))
        K = 1.0 / (1.0 - 2.0 * q * (2.0 - 3.0 * q))
    else:
        a = 6.0 * (1.0 - 2.0 * R) ** 2 * q
        b = 6.0 * q * q
        c = (1.0 + 6.0 * (R - 1.0) * R) ** 2
        S = -2.0 * xlogy(a, a) - 2.0 * xlogy(b, b) - xlogy(c, c)
        K = 1.0 / (1.0 - 24.0 * q * (1.0 - 3.0 * q * (4.0 - 5.0 * q * (4.0 - 7.0 * q))))
    return EntanglementReport(float(S), float(K), R, s1, s2)


def k_s_zero(s: int, R: float) -> float:
    """Schmidt number of ``|s>|0>`` (or ``|0>|s>``) at reflection ``R``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"R must lie in [0, 1], got {R!r}")
    if s == 0 or R == 0.0 or R == 1.0:
        return 1.0
    z = (R / (1.0 - R)) ** 2
    log_inv = 2 * s * math.log1p(-R) + specfun.log_gauss_2f1_terminating(s, z)
    return math.exp(-log_inv)


def k_s_zero_max(s: int) -> float:
    """``2^(2s) (s!)^2 / (2s)!``, reached at ``R = 1/2``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return math.exp(2 * s * math.log(2.0) + 2.0 * specfun.log_factorial(s)
                    - specfun.log_factorial(2 * s))


def k_holland_burnett(s: int) -> float:
    """Schmidt number of ``|s>|s>`` after a balanced (R = 1/2) mixing."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    log_k = (math.log(math.pi) + 2.0 * specfun.log_factorial(s)
             - 2.0 * specfun.log_gamma_half(2 * s + 1)
             - specfun.log_genhyp_4f3_hb(s).log_magnitude)
    return math.exp(log_k)


def hb_power_fit(s_values) -> float:
    """Exponent ``q`` of the model ``K = s^q`` fitted by least squares in log-log.

    The model has no prefactor, so the fit goes through the origin.
    """
    s = np.asarray(list(s_values), dtype=float)
    if np.any(s < 2):
        raise ValueError("fit needs s >= 2 (ln s must be positive)")
    x = np.log(s)
    y = np.log([k_holland_burnett(int(v)) for v in s])
    return float(x @ y / (x @ x))


def spectrum_grid(s1: int, s2: int, R_values, epsilon: float = 0.0, branch=1) -> np.ndarray:
    """Schmidt spectra for many ``R`` at once, shape ``(len(R), N + 1)``."""
    st = InitialState(s1, s2)
    R_values = np.asarray(R_values, dtype=float)
    out = np.empty((R_values.size, st.N + 1))
    k = np.arange(st.N + 1)
    for i, R in enumerate(R_values.ravel()):
        e = point_from_R(float(R), epsilon, branch)
        if e.R == 0.0 or e.R == 1.0:
            out[i] = np.abs(amplitudes(st, e).c) ** 2
            continue
        mp = mixing(e)
        M = coefficient_matrix(st.N, mp.mu)
        c = M @ (M[st.s1] * np.exp(-2j * k * mp.phase_unit))
        out[i] = np.abs(c) ** 2
    return out


def curves(s1: int, s2: int, R_values, epsilon: float = 0.0):
    """``(S_N, K)`` arrays along an ``R`` grid via the general pipeline."""
    lam = spectrum_grid(s1, s2, R_values, epsilon)
    S = 0.0 - np.sum(xlogy(lam, lam), axis=1)
    K = 1.0 / np.sum(lam * lam, axis=1)
    return S, K


@dataclass(frozen=True)
class Maximum:
    measure: str
    value: float
    R: tuple


def _golden_max(f, a: float, b: float, tol: float):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def maximize(s1: int, s2: int, epsilon: float = 0.0, step: float = 1e-4,
             tol: float = 1e-7) -> dict:
    """Maximizers of ``S_N`` and ``K`` over the admissible ``R`` range.

    Grid scan followed by golden-section refinement. Both symmetric
    maximizers ``R*`` and ``1 - R*`` are reported when they are distinct
    and admissible. Ties on the grid resolve to the smaller ``R``.
    """
    R_hi = 1.0 / (1.0 + epsilon ** 2)
    n = int(round(R_hi / step)) + 1
    grid = np.linspace(0.0, R_hi, n)
    S, K = curves(s1, s2, grid, epsilon)
    out = {}
    for name, values, idx in (("S_N", S, 0), ("K", K, 1)):
        i = int(np.argmax(values))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, n - 1)]

        def f(R, idx=idx):
            return curves(s1, s2, np.array([R]), epsilon)[idx][0]

        if i in (0, n - 1):
            R_star, v_star = float(grid[i]), float(values[i])
        else:
            R_star, v_star = _golden_max(f, float(lo), float(hi), tol)
        maximizers = [R_star]
        mirror = 1.0 - R_star
        if abs(mirror - R_star) > 10 * tol and mirror <= R_hi:
            maximizers.append(mirror)
        out[name] = Maximum(name, float(v_star), tuple(sorted(maximizers)))
    return out
