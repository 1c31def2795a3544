import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paratransmon.coupling import (
    CoupledPair,
    couplings_from,
    coupling_scale,
    dispersive_shifts,
    eigenbasis_couplings,
    g_C_for,
)
from paratransmon.errors import DispersiveError, PhysicsError
from paratransmon.oracle import chi_numeric, coupled_levels
from paratransmon.perturbation import transmon_series
from paratransmon.tunable import TransmonSpec

Q1 = TransmonSpec.fixed(200.0, 0.18)
Q2 = TransmonSpec.fixed(200.0, 0.175)


def pair_for_g(g):
    return CoupledPair(Q1, Q2, g_C_for(g, 0.18, 0.175))


def test_harmonic_limit_couplings():
    c = couplings_from(3.0, 1.0, 1.0, 1.0, 1.0)
    assert (c.g11, c.g12, c.g21, c.g22) == (3.0, pytest.approx(3 * math.sqrt(2)), pytest.approx(3 * math.sqrt(2)), 6.0)


def test_zero_coupling():
    c = eigenbasis_couplings(CoupledPair(Q1, Q2, 0.0))
    assert c.g == c.g11 == c.g12 == c.g21 == c.g22 == 0.0
    r = dispersive_shifts(CoupledPair(Q1, Q2, 0.0))
    assert r.d_omega_1 == r.d_omega_2 == r.d_eta_1 == r.d_eta_2 == r.chi == 0.0


def test_coupling_scale_round_trip():
    assert coupling_scale(g_C_for(7.0, 0.18, 0.175), 0.18, 0.175) == pytest.approx(7.0, rel=1e-15)


def test_consistency_identities():
    c = eigenbasis_couplings(pair_for_g(5.0))
    s = transmon_series()
    lam_1, big_1 = s.lam.evaluate(0.18), s.Lam.evaluate(0.18)
    big_2 = s.Lam.evaluate(0.175)
    assert c.g22 == pytest.approx(2 * c.g * big_1 * big_2, rel=1e-14)
    assert c.g21 / c.g11 == pytest.approx(math.sqrt(2) * big_1 / lam_1, rel=1e-14)


def test_frequency_shifts_antisymmetric_and_swap():
    pair = pair_for_g(5.0)
    r = dispersive_shifts(pair)
    assert r.d_omega_1 == -r.d_omega_2
    s = dispersive_shifts(pair.swapped())
    assert s.d_omega_1 == pytest.approx(-r.d_omega_1, rel=1e-13)
    assert s.chi == pytest.approx(r.chi, rel=1e-13)
    assert s.d_eta_1 == pytest.approx(r.d_eta_2, rel=1e-13)


def test_shifts_scale_with_coupling_squared():
    a, b = dispersive_shifts(pair_for_g(2.0)), dispersive_shifts(pair_for_g(4.0))
    for name in ("d_omega_1", "d_omega_2", "d_eta_1", "d_eta_2", "chi"):
        assert getattr(b, name) == pytest.approx(4 * getattr(a, name), rel=1e-10)


def test_chi_agrees_with_oracle_at_small_coupling():
    g = 1.0
    chi = dispersive_shifts(pair_for_g(g)).chi
    chi_num = chi_numeric(coupled_levels(pair_for_g(g), 30)[0])
    assert chi == pytest.approx(chi_num, rel=1e-3)


def test_guards():
    with pytest.raises(PhysicsError):
        CoupledPair(Q1, Q2, -1.0)
    with pytest.raises(DispersiveError, match="singular"):
        dispersive_shifts(CoupledPair(Q1, Q1, 1.0))
    # omega_1 - omega_2 = eta_1 puts the pair on a pole of the shift formulas
    s = transmon_series()
    w2 = s.values(0.175, 200.0)["omega"]
    lo, hi = 0.15, 0.18
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        v = s.values(mid, 200.0)
        if v["omega"] - v["eta"] > w2:
            lo = mid
        else:
            hi = mid
    with pytest.raises(DispersiveError, match="pole"):
        dispersive_shifts(CoupledPair(TransmonSpec.fixed(200.0, lo), Q2, 1.0))


def test_validity_warning():
    with pytest.warns(RuntimeWarning, match="not >>"):
        dispersive_shifts(pair_for_g(20.0))
    assert not pair_for_g(20.0).is_dispersive()
    assert pair_for_g(5.0).is_dispersive()


def test_swapping_a_parked_tunable_pair_is_refused():
    tunable = TransmonSpec.from_xi_range(200.0, 0.16, 0.2)
    with pytest.raises(PhysicsError):
        CoupledPair(tunable, Q2, 1.0, 0.5).swapped()


@pytest.mark.filterwarnings("ignore:.*is not >> g")
@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.1, max_value=10.0), st.floats(min_value=1.1, max_value=3.0))
def test_property_g_squared_scaling(g, factor):
    a, b = dispersive_shifts(pair_for_g(g)), dispersive_shifts(pair_for_g(factor * g))
    assert b.chi == pytest.approx(factor**2 * a.chi, rel=1e-10)
    assert b.d_omega_1 == pytest.approx(factor**2 * a.d_omega_1, rel=1e-10)
    assert a.d_omega_1 + a.d_omega_2 == 0.0
