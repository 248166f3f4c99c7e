import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupledosc import oracle
from coupledosc.dynamics import (MAX_EXCITATIONS, InitialState, amplitudes, coefficient_matrix,
                                 coupling_amplitude, identity_table, mixing, probabilities,
                                 schmidt_modes, spectrum_at, swap_table)
from coupledosc.model import CouplingSet, evolution_point, point_from_R, rabi_params


def _gbinom(x: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= x - i
    return out / math.factorial(j)


def literal_coefficient(n, m, k, p, mu: Fraction):
    """Jacobi-polynomial form of the coefficient, exact sum plus 50-digit prefactor."""
    N = n + m
    a, b = -(1 + N), p - n
    x = -(2 + mu * mu) / (mu * mu)
    P = sum(_gbinom(Fraction(k + a), j) * _gbinom(Fraction(k + b), k - j)
            * ((x - 1) / 2) ** (k - j) * ((x + 1) / 2) ** j for j in range(k + 1))
    with mpmath.workdps(50):
        u = mpmath.mpf(mu.numerator) / mu.denominator
        pre = (u ** (k + n) * mpmath.sqrt(mpmath.factorial(k) * mpmath.factorial(p)
                                          / (mpmath.factorial(n) * mpmath.factorial(m)))
               / (1 + u * u) ** (mpmath.mpf(N) / 2))
        return float(pre * mpmath.mpf(P.numerator) / P.denominator)


@pytest.mark.parametrize("mu", [Fraction(3, 10), Fraction(1), Fraction(5, 2)])
@pytest.mark.parametrize("N", [1, 2, 5, 9, 16])
def test_coefficients_match_jacobi_form(mu, N):
    M = coefficient_matrix(N, float(mu))
    L = np.array([[literal_coefficient(n, N - n, k, N - k, mu) for k in range(N + 1)]
                  for n in range(N + 1)])
    assert np.abs(M - L).max() < 1e-13


def test_single_excitation_balanced():
    M = coefficient_matrix(1, 1.0)
    assert np.abs(M) == pytest.approx(np.full((2, 2), 1.0 / math.sqrt(2.0)), abs=1e-15)


def test_coupling_amplitude_checks_conservation():
    assert coupling_amplitude(1, 0, 0, 1, 1.0) == pytest.approx(coefficient_matrix(1, 1.0)[1, 0])
    with pytest.raises(ValueError, match="not conserved"):
        coupling_amplitude(1, 1, 0, 1, 1.0)
    with pytest.raises(ValueError):
        coefficient_matrix(3, 0.0)
    with pytest.raises(ValueError):
        coefficient_matrix(MAX_EXCITATIONS + 1, 1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, MAX_EXCITATIONS), st.floats(1e-3, 1e3))
def test_coefficient_matrix_orthogonal(N, mu):
    M = coefficient_matrix(N, mu)
    assert np.abs(M @ M.T - np.eye(N + 1)).max() < 1e-10


def test_initial_state_validation():
    with pytest.raises(ValueError):
        InitialState(-1, 0)
    with pytest.raises(ValueError):
        InitialState(MAX_EXCITATIONS, 1)


def test_mixing_examples():
    mp = mixing(point_from_R(0.5))
    assert mp.mu == pytest.approx(1.0) and mp.phase_unit == pytest.approx(math.pi / 4)
    mp = mixing(point_from_R(0.3, 0.5))
    e = point_from_R(0.3, 0.5)
    ratio = 0.7 / 0.3
    assert mp.mu == pytest.approx(math.sqrt(1 + ratio * e.cos_phi ** 2) - e.cos_phi * math.sqrt(ratio))
    with pytest.raises(ValueError):
        mixing(point_from_R(0.0))


def test_hong_ou_mandel_null():
    p = probabilities(amplitudes(InitialState(1, 1), point_from_R(0.5)))
    assert p == pytest.approx([0.5, 0.0, 0.5], abs=1e-15)


def test_one_one_general_R():
    R = 0.3
    p = probabilities(amplitudes(InitialState(1, 1), point_from_R(R)))
    assert p == pytest.approx([2 * R * (1 - R), (1 - 2 * R) ** 2, 2 * R * (1 - R)], abs=1e-14)


def test_zero_two_balanced():
    p = probabilities(amplitudes(InitialState(0, 2), point_from_R(0.5)))
    assert p == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)


@pytest.mark.parametrize("s,R", [(1, 0.2), (4, 0.5), (9, 0.71), (30, 0.4)])
def test_single_mode_input_is_binomial(s, R):
    p = probabilities(amplitudes(InitialState(s, 0), point_from_R(R)))
    n = np.arange(s + 1)
    ref = np.array([math.comb(s, int(j)) for j in n]) * (1 - R) ** n * R ** (s - n)
    assert p == pytest.approx(ref, abs=1e-13)


def test_identity_and_swap_tables():
    st_ = InitialState(2, 3)
    assert np.argmax(np.abs(identity_table(st_).c)) == 2
    assert np.argmax(np.abs(swap_table(st_).c)) == 3
    assert probabilities(amplitudes(st_, point_from_R(1.0))).tolist() == [0, 0, 0, 1, 0, 0]
    assert probabilities(amplitudes(st_, point_from_R(0.0))).tolist() == [0, 0, 1, 0, 0, 0]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 20), st.integers(0, 20), st.floats(0.0, 1.0), st.floats(-3, 3),
       st.sampled_from([1, -1]))
def test_norm_and_branch_independence(s1, s2, R, eps, branch):
    R = R / (1 + eps * eps)
    lam = spectrum_at(s1, s2, R, eps, branch).lam
    assert lam.sum() == pytest.approx(1.0, abs=1e-12)
    assert lam == pytest.approx(spectrum_at(s1, s2, R, eps, -branch).lam, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 15), st.integers(0, 15), st.floats(0.0, 1.0))
def test_exchange_and_reflection_symmetry(s1, s2, R):
    a = spectrum_at(s1, s2, R).lam
    assert a == pytest.approx(spectrum_at(s2, s1, R).lam[::-1], abs=1e-12)
    assert np.sort(a) == pytest.approx(np.sort(spectrum_at(s1, s2, 1.0 - R).lam), abs=1e-12)


@pytest.mark.parametrize("eps", [0.0, 0.4, -1.3])
@pytest.mark.parametrize("s1,s2", [(1, 0), (1, 1), (0, 3), (2, 5), (6, 6)])
def test_amplitudes_match_sector_evolution(eps, s1, s2):
    r = rabi_params(CouplingSet.from_reduced(0.0, 0.0, 1.0, 0.0), 1.0, 1.0 + eps)
    h = oracle.sector_hamiltonian(s1 + s2, r.delta_omega, r.Omega, coupling_sign=-1)
    for t in np.linspace(0.05, 9.0, 23):
        c = amplitudes(InitialState(s1, s2), evolution_point(r, t)).c
        ref = oracle.evolve_sector(h, s1, s2, t).amplitudes
        assert oracle.fidelity_up_to_phase(c, ref) == pytest.approx(1.0, abs=1e-10)


def test_schmidt_modes_are_populations():
    a = amplitudes(InitialState(2, 1), point_from_R(0.37))
    assert schmidt_modes(a).lam == pytest.approx(probabilities(a))
