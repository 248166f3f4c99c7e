import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupledosc import entanglement as ent
from coupledosc.dynamics import spectrum_at


def test_measures_on_simple_spectra():
    assert ent.von_neumann([1.0, 0.0]) == 0.0
    assert ent.von_neumann([0.5, 0.5]) == pytest.approx(math.log(2))
    assert ent.schmidt_number([0.25] * 4) == pytest.approx(4.0)
    assert ent.schmidt_number([1.0, 0.0, 0.0]) == 1.0
    assert math.copysign(1.0, ent.von_neumann([1.0])) == 1.0


@settings(max_examples=200)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40).filter(lambda v: sum(v) > 1e-6))
def test_measure_bounds(raw):
    lam = np.array(raw) / sum(raw)
    K = ent.schmidt_number(lam)
    assert 1.0 - 1e-12 <= K <= len(lam) * (1 + 1e-12)
    assert -1e-12 <= ent.von_neumann(lam) <= math.log(len(lam)) + 1e-12


def test_one_one_closed_form_maximum():
    r = ent.closed_form(1, 1, 0.5 * (1 + 1 / math.sqrt(3)))
    assert r.K == pytest.approx(3.0)
    assert r.S_N == pytest.approx(math.log(3.0))
    hom = ent.closed_form(1, 1, 0.5)
    assert hom.S_N == pytest.approx(math.log(2)) and hom.K == pytest.approx(2.0)


@pytest.mark.parametrize("case", sorted(ent.CLOSED_FORM_CASES))
@pytest.mark.parametrize("R", [0.0, 0.13, 0.5, 0.77, 1.0])
def test_closed_forms_match_pipeline(case, R):
    cf = ent.closed_form(*case, R)
    r = ent.report(*case, R)
    assert (cf.S_N, cf.K) == pytest.approx((r.S_N, r.K), abs=1e-12)


def test_closed_form_unsupported():
    with pytest.raises(ent.UnsupportedCaseError):
        ent.closed_form(3, 1, 0.4)
    with pytest.raises(ValueError):
        ent.closed_form(1, 1, 1.5)


def test_k_s_zero_examples():
    assert ent.k_s_zero(0, 0.3) == 1.0
    assert ent.k_s_zero(1, 0.5) == pytest.approx(2.0)
    assert ent.k_s_zero_max(4) == pytest.approx(128 / 35)
    assert ent.k_s_zero(4, 0.5) == pytest.approx(128 / 35)


@pytest.mark.parametrize("s", [1, 3, 8, 20])
@pytest.mark.parametrize("R", [0.1, 0.5, 0.9])
def test_k_s_zero_matches_pipeline(s, R):
    assert ent.k_s_zero(s, R) == pytest.approx(ent.schmidt_number(spectrum_at(s, 0, R)), rel=1e-12)


def test_k_s_zero_max_against_central_binomial():
    for s in range(40):
        assert ent.k_s_zero_max(s) == pytest.approx(4 ** s / math.comb(2 * s, s), rel=1e-13)


def test_holland_burnett_small():
    assert ent.k_holland_burnett(0) == pytest.approx(1.0)
    assert ent.k_holland_burnett(1) == pytest.approx(2.0)
    assert ent.k_holland_burnett(2) == pytest.approx(32 / 11)


@pytest.mark.parametrize("s", [1, 2, 5, 12, 30])
def test_holland_burnett_matches_pipeline(s):
    assert ent.k_holland_burnett(s) == pytest.approx(ent.schmidt_number(spectrum_at(s, s, 0.5)), rel=1e-10)


def test_holland_burnett_power_fit():
    q = ent.hb_power_fit(range(2, 31))
    assert 0.85 <= q <= 0.95
    with pytest.raises(ValueError):
        ent.hb_power_fit([1, 2])


def test_holland_burnett_odd_states_vanish():
    lam = spectrum_at(3, 3, 0.5).lam
    assert lam[1::2] == pytest.approx(np.zeros(3), abs=1e-15)


def test_curves_symmetric_in_R():
    R = np.linspace(0, 1, 201)
    S, K = ent.curves(2, 1, R)
    assert S == pytest.approx(S[::-1], abs=1e-12)
    assert K == pytest.approx(K[::-1], abs=1e-12)
    assert (S >= 0).all() and not np.signbit(S).any()


def test_maximize_one_one():
    m = ent.maximize(1, 1)
    assert m["K"].value == pytest.approx(3.0, abs=1e-9)
    assert m["K"].R == pytest.approx((0.5 * (1 - 1 / math.sqrt(3)), 0.5 * (1 + 1 / math.sqrt(3))), abs=1e-6)
    assert m["S_N"].value == pytest.approx(math.log(3.0), abs=1e-9)


def test_maximize_single_mode_input_is_balanced():
    m = ent.maximize(5, 0)
    assert m["K"].R == pytest.approx((0.5,), abs=1e-6)
    assert m["K"].value == pytest.approx(ent.k_s_zero_max(5), rel=1e-10)


def test_maximize_with_detuning_stays_admissible():
    m = ent.maximize(1, 0, epsilon=1.0)
    assert max(m["K"].R) <= 0.5 + 1e-12
    assert m["K"].value == pytest.approx(2.0, abs=1e-9)
