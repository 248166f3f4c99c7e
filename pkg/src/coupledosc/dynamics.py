"""Closed-form transition amplitudes in a fixed excitation sector.

Starting from ``|s1>|s2>`` the state stays inside the sector
``n + m = N = s1 + s2`` and reads

    c_{n,N-n} = sum_k A^{s1,s2}_{k,N-k} A^{n,N-n}_{k,N-k} exp(-2 i k theta),
    theta     = arccos(sqrt(1-R) sin(phi)),

with ``A^{n,m}_{k,p}`` a Jacobi polynomial
``P_k^{(-(1+N), p-n)}(-(2+mu^2)/mu^2)`` times factorial weights.

Numerics: at that argument the terminating Jacobi sum cancels
catastrophically (all accuracy is lost by N ~ 20). The identity

    P_k^{(-(1+N), p-n)}(x) = ((1-x)/2)^k P_k^{(n-k, p-n)}((x+3)/(x-1))

maps the argument to ``(1-mu^2)/(1+mu^2)`` in [-1, 1] and turns every
coefficient into

    A = sqrt(k! p! / (n! m!)) (1+mu^2)^(-N/2) mu^(n-k)
        * sum_s (-1)^s C(n, k-s) C(m, s) mu^(2s),

an integer-coefficient polynomial in ``mu^2``. It is evaluated with a
double-double Horner scheme, which keeps the coefficient matrix orthogonal
to ~1e-15 up to N = 60.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import specfun
from .model import EvolutionPoint, point_from_R

MAX_EXCITATIONS = 60


@dataclass(frozen=True)
class InitialState:
    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 < 0 or self.s2 < 0 or int(self.s1) != self.s1 or int(self.s2) != self.s2:
            raise ValueError(f"quantum numbers must be nonnegative integers, got ({self.s1}, {self.s2})")
        if self.s1 + self.s2 > MAX_EXCITATIONS:
            raise ValueError(f"s1 + s2 = {self.s1 + self.s2} exceeds the supported {MAX_EXCITATIONS}")

    @property
    def N(self) -> int:
        return self.s1 + self.s2


@dataclass(frozen=True)
class MixingParams:
    mu: float
    phase_unit: float


@dataclass(frozen=True, eq=False)
class AmplitudeTable:
    c: np.ndarray
    s1: int
    s2: int
    R: float

    @property
    def N(self) -> int:
        return self.s1 + self.s2


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    lam: np.ndarray

    def __len__(self):
        return len(self.lam)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def mixing(e: EvolutionPoint) -> MixingParams:
    """Mixing parameter ``mu`` and the phase per normal-mode quantum."""
    R = e.R
    if not (0.0 < R < 1.0):
        raise ValueError(f"mixing is defined for 0 < R < 1 only (got R={R!r}); "
                         "use the identity/swap tables")
    # mu = sqrt(1 + x^2) - x with x = cos(phi) sqrt((1-R)/R), cancellation-free
    x = e.cos_phi * (math.sqrt(1.0 - R) / math.sqrt(R))
    h = math.hypot(1.0, x)
    mu = 1.0 / (h + x) if x > 0 else h - x
    arg = math.sqrt(1.0 - R) * e.sin_phi
    phase_unit = math.acos(min(1.0, max(-1.0, arg)))
    return MixingParams(mu=mu, phase_unit=phase_unit)


@lru_cache(maxsize=None)
def _coefficient_layout(N: int):
    """Integer polynomial coefficients of every (n, k) entry, both orientations.

    Forward layout (for mu <= 1): coefficients of ``u^j`` after factoring out
    ``u^s_lo``. Reverse layout (for mu > 1): coefficients of ``(1/u)^j`` after
    factoring out ``u^s_hi``.
    """
    size = N + 1
    fwd = [[0] * size for _ in range(size * size)]
    rev = [[0] * size for _ in range(size * size)]
    s_lo = np.zeros((size, size), dtype=int)
    s_hi = np.zeros((size, size), dtype=int)
    for n in range(size):
        m = N - n
        for k in range(size):
            lo = max(0, k - n)
            hi = min(k, m)
            s_lo[n, k] = lo
            s_hi[n, k] = hi
            row = n * size + k
            for s in range(lo, hi + 1):
                c = math.comb(n, k - s) * math.comb(m, s)
                if s % 2:
                    c = -c
                fwd[row][s - lo] = c
                rev[row][hi - s] = c
    fwd_dd = specfun.int_to_dd([c for row in fwd for c in row])
    rev_dd = specfun.int_to_dd([c for row in rev for c in row])
    shape = (size, size, size)
    layout = {
        "fwd": (fwd_dd[0].reshape(shape), fwd_dd[1].reshape(shape)),
        "rev": (rev_dd[0].reshape(shape), rev_dd[1].reshape(shape)),
        "s_lo": s_lo,
        "s_hi": s_hi,
    }
    idx = np.arange(size)
    lf = np.array([specfun.log_factorial(i) for i in idx])
    # rows n, columns k; p = N - k, m = N - n
    layout["log_weight"] = 0.5 * (lf[None, :] + lf[::-1][None, :] - lf[:, None] - lf[::-1][:, None])
    layout["n_minus_k"] = idx[:, None] - idx[None, :]
    return layout


@lru_cache(maxsize=1024)
def _coefficient_matrix_cached(N: int, mu: float) -> np.ndarray:
    if N == 0:
        return _readonly(np.ones((1, 1)))
    lay = _coefficient_layout(N)
    uh, ul = specfun.two_prod(mu, mu)
    log_mu = math.log(mu)
    if mu <= 1.0:
        ch, cl = lay["fwd"]
        anchor = lay["s_lo"]
        xh, xl = uh, ul
    else:
        ch, cl = lay["rev"]
        anchor = lay["s_hi"]
        xh, xl = specfun.dd_reciprocal(uh, ul)
    poly = specfun.horner_dd(ch, cl, xh, xl)
    log_pre = (lay["log_weight"] - 0.5 * N * math.log1p(mu * mu)
               + (lay["n_minus_k"] + 2 * anchor) * log_mu)
    return _readonly(np.exp(log_pre) * poly)


def coefficient_matrix(N: int, mu: float) -> np.ndarray:
    """Matrix ``M[n, k] = A^{n, N-n}_{k, N-k}(mu)``; orthogonal for any mu > 0."""
    if N < 0 or N > MAX_EXCITATIONS:
        raise ValueError(f"N must lie in [0, {MAX_EXCITATIONS}], got {N}")
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    return _coefficient_matrix_cached(int(N), float(mu))


def coupling_amplitude(n: int, m: int, k: int, p: int, mu: float) -> float:
    if min(n, m, k, p) < 0:
        raise ValueError("indices must be nonnegative")
    if n + m != k + p:
        raise ValueError(f"excitation number not conserved: n+m={n + m}, k+p={k + p}")
    return float(coefficient_matrix(n + m, mu)[n, k])


def identity_table(st: InitialState) -> AmplitudeTable:
    c = np.zeros(st.N + 1, dtype=complex)
    c[st.s1] = 1.0
    return AmplitudeTable(_readonly(c), st.s1, st.s2, 0.0)


def swap_table(st: InitialState) -> AmplitudeTable:
    """Full transfer ``|s1>|s2> -> |s2>|s1>`` (global phase dropped)."""
    c = np.zeros(st.N + 1, dtype=complex)
    c[st.s2] = 1.0
    return AmplitudeTable(_readonly(c), st.s1, st.s2, 1.0)


def amplitudes(st: InitialState, e: EvolutionPoint) -> AmplitudeTable:
    if e.R == 0.0:
        return identity_table(st)
    if e.R == 1.0:
        return swap_table(st)
    mp = mixing(e)
    M = coefficient_matrix(st.N, mp.mu)
    k = np.arange(st.N + 1)
    phases = np.exp(-2j * k * mp.phase_unit)
    c = M @ (M[st.s1] * phases)
    return AmplitudeTable(_readonly(c), st.s1, st.s2, e.R)


def probabilities(a: AmplitudeTable) -> np.ndarray:
    return _readonly(np.abs(a.c) ** 2)


def schmidt_modes(a: AmplitudeTable) -> SchmidtSpectrum:
    return SchmidtSpectrum(probabilities(a))


def spectrum_at(s1: int, s2: int, R: float, epsilon: float = 0.0, branch=1) -> SchmidtSpectrum:
    """Schmidt spectrum at a given reflection coefficient."""
    return schmidt_modes(amplitudes(InitialState(s1, s2), point_from_R(R, epsilon, branch)))
