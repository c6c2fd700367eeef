import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpkdv import continuum as ct
from lpkdv.errors import DivergentDenominator, WindowTooSmall
from lpkdv.lattice import LatticeParams
from lpkdv.soliton import SolitonSpec, soliton_grid

P = LatticeParams(2.0, 1.0)


@pytest.fixture(scope="module")
def strip():
    return soliton_grid(SolitonSpec.single(0.5, 1.0), P, -100, 0, 200, 3)


def test_rhs_vanish_on_constants():
    st_v = ct.ContinuumState(np.full(10, 0.3), 0, 0.0, 2.0)
    assert np.nanmax(np.abs(ct.rhs_v(st_v))) == 0.0
    st_q = ct.ContinuumState(np.full(10, 4.0), 0, 0.0, 2.0)
    assert np.nanmax(np.abs(ct.rhs_q(st_q))) == 0.0
    r = ct.rhs_dkdv(ct.ContinuumState(np.full(5, 1.0)))
    assert np.isnan(r[0]) and np.isnan(r[-1]) and np.all(r[1:-1] == 0.0)


def test_rhs_examples():
    s = ct.ContinuumState(np.array([1.0, 2.0, 3.0]))
    assert ct.rhs_dkdv(s)[1] == pytest.approx(4.0 * (3.0 - 1.0))
    assert ct.rhs_volterra(s)[1] == pytest.approx(2.0 * 2.0)
    with pytest.raises(DivergentDenominator):
        ct.rhs_q(ct.ContinuumState(np.array([0.0, 1.0, 0.0]), p=2.0))


def test_miura_chain(strip):
    n = np.arange(-90, 90)
    direct = ct.miura_u_to_a(strip, n, 1, P)
    chain = ct.miura_a(ct.miura_s(ct.q_from_grid(strip, np.arange(-91, 90), 1, P), P.p))[1:]
    assert np.max(np.abs(direct - chain)) < 1e-14


@given(st.lists(st.floats(0.1, 5.0), min_size=3, max_size=20))
def test_miura_maps(qs):
    q = np.array(qs)
    s = ct.miura_s(q, 2.0)
    assert np.allclose(s * q, 4.0)
    a = ct.miura_a(s)
    assert np.allclose(a[1:], s[1:] * s[:-1])


def test_time_constant_and_flow_consistency(strip):
    q = ct.q_from_grid(strip, np.arange(-100, 98), 0, P)
    state = ct.ContinuumState(q, -100, 0.0, P.p)
    assert ct.calibrate_time_scale(state) == pytest.approx(1.0 / (2.0 * P.p), abs=1e-12)
    mc = ct.miura_flow_consistency(state, 0.2, 10)
    assert mc.s_error < 1e-6 and mc.a_error < 1e-6
    bad = ct.miura_flow_consistency(state, 0.2, 10, time_scale=1.0)
    assert bad.s_error > 1e-4


def test_integration_margin():
    state = ct.ContinuumState(np.zeros(20), 0, 0.0, 2.0)
    with pytest.raises(WindowTooSmall):
        ct.integrate_dde(ct.rhs_v, state, 1.0, 3)
    out = ct.integrate_dde(ct.rhs_v, state, 1.0, 2)
    assert out.k0 == 8 and out.values.size == 4 and out.tau == 1.0


def test_continuum_order():
    res = ct.continuum_limit_order()
    assert res.status == "ok"
    assert abs(res.order - 1.0) < 0.2
    assert res.errors[0] > res.errors[1] > res.errors[2]


def test_zero_profile_is_exact():
    res = ct.continuum_limit_order(profile=lambda k: 0.0 * np.asarray(k, float))
    assert res.status == "ExactMatch" and np.isnan(res.order)


def test_order_rejects_bad_deltas():
    with pytest.raises(ValueError):
        ct.continuum_limit_order(deltas=(0.05, 0.1))
    with pytest.raises(ValueError):
        ct.lattice_vs_dde_error(2.0, 0.3, 1.0, -10, 10, ct.gaussian_profile, 1)


def test_state_csv_roundtrip():
    state = ct.ContinuumState(np.array([0.1, -2.5, 1e-300]), -7, 0.25, 2.0)
    back = ct.state_from_csv(ct.state_to_csv(state))
    assert back.k0 == -7 and back.tau == 0.25 and np.array_equal(back.values, state.values)
    with pytest.raises(ValueError):
        ct.state_from_csv("1.0\n2.0\n")
