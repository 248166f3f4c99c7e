"""Brute-force references for the closed form.

Three independent routes:

* exact unitary evolution inside one excitation sector (tridiagonal
  Hamiltonian, eigendecomposition);
* multinomial expansion of a lossless beam splitter acting on Fock states;
* evolution of the full two-mode Hamiltonian, counter-rotating terms
  included, in a truncated Fock space.

None of them uses Jacobi polynomials or the ``(R, phi)`` parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import AmplitudeTable, SchmidtSpectrum
from .model import CouplingSet

_HERMITIAN_ATOL = 1e-12
TAIL_BUFFER = 5
TAIL_LIMIT = 1e-10
DEFAULT_CUTOFF_PAD = 20


@dataclass(frozen=True, eq=False)
class SectorHamiltonian:
    """``H = dw * n2 + g (a1^dag a2 + a1 a2^dag)`` restricted to ``n1 + n2 = N``.

    Basis index ``n`` labels ``|n, N - n>``.
    """

    N: int
    diag: np.ndarray
    offdiag: np.ndarray


@dataclass(frozen=True, eq=False)
class SectorState:
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def sector_hamiltonian(N: int, delta_omega: float, Omega: float,
                       coupling_sign: int = 1) -> SectorHamiltonian:
    """Number-conserving Hamiltonian with hopping ``coupling_sign * Omega / 2``.

    Populations are insensitive to ``coupling_sign``. The closed-form
    amplitudes, phases included, correspond to ``coupling_sign = -1``.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    n = np.arange(N + 1)
    diag = delta_omega * (N - n).astype(float)
    m = np.arange(N)
    offdiag = coupling_sign * 0.5 * Omega * np.sqrt((m + 1.0) * (N - m))
    return SectorHamiltonian(N, diag, offdiag)


def evolve_sector(h: SectorHamiltonian, s1: int, s2: int, t: float) -> SectorState:
    if s1 + s2 != h.N:
        raise ValueError(f"s1 + s2 = {s1 + s2} does not match sector N = {h.N}")
    if h.N == 0:
        return SectorState(np.ones(1, dtype=complex))
    w, v = scipy.linalg.eigh_tridiagonal(h.diag, h.offdiag)
    psi = v @ (np.exp(-1j * w * t) * v[s1])
    return SectorState(psi)


def oracle_schmidt(state: SectorState) -> SchmidtSpectrum:
    # a sector state is sum_n c_n |n>|N-n>: already in Schmidt form
    return SchmidtSpectrum(np.abs(state.amplitudes) ** 2)


def beam_splitter_amplitudes(s1: int, s2: int, theta: float, phi: float = 0.0) -> AmplitudeTable:
    """Output Fock amplitudes of a beam splitter fed with ``|s1>|s2>``.

    Substitutes ``a1^dag -> cos(theta) b1^dag + e^{i phi} sin(theta) b2^dag`` and
    ``a2^dag -> -e^{-i phi} sin(theta) b1^dag + cos(theta) b2^dag`` and
    expands the product of powers as a polynomial in ``(b1^dag, b2^dag)``.
    """
    N = s1 + s2
    c, s = math.cos(theta), math.sin(theta)
    ep = complex(math.cos(phi), math.sin(phi))
    # coefficient arrays indexed by the power of b1^dag
    first = np.array([math.comb(s1, j) * c ** j * (ep * s) ** (s1 - j) for j in range(s1 + 1)],
                     dtype=complex)
    second = np.array([math.comb(s2, j) * (-s / ep) ** j * c ** (s2 - j) for j in range(s2 + 1)],
                      dtype=complex)
    poly = np.convolve(first, second)
    n = np.arange(N + 1)
    lf = np.array([math.lgamma(i + 1.0) for i in n])
    weight = np.exp(0.5 * (lf + lf[::-1] - math.lgamma(s1 + 1.0) - math.lgamma(s2 + 1.0)))
    R = s * s
    return AmplitudeTable(poly * weight, s1, s2, R)


@dataclass(frozen=True, eq=False)
class TruncatedTwoModeHamiltonian:
    """Full quadratic two-mode Hamiltonian in units of hbar, per-mode cutoff ``n_max``.

    ``H = w1 n1 + w2 n2 + alpha a1 a2 + beta a1 a2^dag + gamma a1^dag a2
    + delta a1^dag a2^dag``. Only Hermitian coupling sets are accepted.
    """

    n_max: int
    omega1: float
    omega2: float
    couplings: CouplingSet
    matrix: np.ndarray


def truncated_hamiltonian(c: CouplingSet, omega1: float, omega2: float,
                          n_max: int) -> TruncatedTwoModeHamiltonian:
    alpha, beta, gamma, delta = (x / c.hbar for x in (c.alpha, c.beta, c.gamma, c.delta))
    if abs(gamma - np.conj(beta)) > _HERMITIAN_ATOL or abs(delta - np.conj(alpha)) > _HERMITIAN_ATOL:
        raise ValueError(
            "coupling set is not Hermitian (needs gamma = beta*, delta = alpha*); "
            "with real couplings this means A12 = A21 = 0"
        )
    d = n_max + 1
    a = np.diag(np.sqrt(np.arange(1.0, d)), k=1)
    eye = np.eye(d)
    a1 = np.kron(a, eye)
    a2 = np.kron(eye, a)
    num = np.diag(np.arange(d, dtype=float))
    H = (omega1 * np.kron(num, eye) + omega2 * np.kron(eye, num)
         + alpha * a1 @ a2 + beta * a1 @ a2.T + gamma * a1.T @ a2 + delta * a1.T @ a2.T)
    H = H.astype(complex)
    return TruncatedTwoModeHamiltonian(n_max, omega1, omega2, c, H)


@dataclass(frozen=True, eq=False)
class TruncatedEvolution:
    times: np.ndarray
    spectra: np.ndarray      # (len(times), n_max + 1), sorted descending
    populations: np.ndarray  # (len(times), N + 1): |psi_{n, N-n}|^2 in the initial sector
    norm_drift: float
    tail_probability: float

    @property
    def truncation_safe(self) -> bool:
        return self.tail_probability < TAIL_LIMIT


def evolve_truncated(h: TruncatedTwoModeHamiltonian, s1: int, s2: int, times) -> TruncatedEvolution:
    """Exact evolution of ``|s1>|s2>``; Schmidt spectra from the reduced density matrix.

    Counter-rotating terms leak amplitude into the sectors ``N +- 2``, so the
    Schmidt basis is no longer the Fock basis. For symmetric initial states
    (``s1 = s2``) the closed-form spectrum is doubly degenerate and this
    leakage splits it at first order in coupling/omega; the populations of
    the initial sector deviate only at second order.
    """
    if max(s1, s2) > h.n_max - TAIL_BUFFER:
        raise ValueError(f"initial state ({s1}, {s2}) too close to cutoff n_max={h.n_max}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    d = h.n_max + 1
    w, v = np.linalg.eigh(h.matrix)
    psi0 = np.zeros(d * d, dtype=complex)
    psi0[s1 * d + s2] = 1.0
    coeff = v.conj().T @ psi0
    N = s1 + s2
    spectra = np.empty((times.size, d))
    pops = np.empty((times.size, N + 1))
    sector = (np.arange(N + 1), N - np.arange(N + 1))
    drift = 0.0
    tail = 0.0
    edge = np.arange(d) > h.n_max - TAIL_BUFFER
    for i, t in enumerate(times):
        psi = (v @ (np.exp(-1j * w * t) * coeff)).reshape(d, d)
        p = np.abs(psi) ** 2
        pops[i] = p[sector]
        drift = max(drift, abs(p.sum() - 1.0))
        tail = max(tail, p[edge, :].sum() + p[:, edge].sum() - p[np.ix_(edge, edge)].sum())
        rho1 = psi @ psi.conj().T
        lam = np.linalg.eigvalsh(0.5 * (rho1 + rho1.conj().T))
        spectra[i] = np.clip(lam[::-1], 0.0, None)
    return TruncatedEvolution(times, spectra, pops, drift, tail)


def default_cutoff(s1: int, s2: int) -> int:
    return s1 + s2 + DEFAULT_CUTOFF_PAD


def fidelity_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|`` for unit vectors; 1 means equal up to a global phase."""
    return float(abs(np.vdot(a, b)))
