import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpkdv import painleve as pv
from lpkdv.errors import (
    InvalidParams,
    NegativePQSum,
    NewtonFailure,
    OutOfWindow,
    SingularStep,
    ZeroDifference,
)
from lpkdv.lattice import Grid, LatticeParams, residual_max
from lpkdv.soliton import SolitonSpec, soliton_grid

P = LatticeParams(2.0, 1.0)


@pytest.fixture(scope="module")
def generated():
    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0)
    return rp, pv.painleve_generate(rp)


def test_reduction_params():
    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0)
    assert rp.delta == 1.0 and rp.K == 0.5
    assert pv.ReductionParams(0.0, 0.0, 2.0, 1.0).K == 0.0
    assert rp.at_row(3).m == 3
    assert rp.header() == "# w=1.0 c=0.1 p=2.0 q=1.0 m=0"
    with pytest.raises(InvalidParams):
        pv.ReductionParams(1.0, 0.0, 1.0, 1.0)
    with pytest.raises(InvalidParams):
        pv.ReductionParams(0.5, 0.0, -2.0, 1.0)


def test_map_examples():
    g = pv.map_forward(Grid(0, 0, np.zeros((3, 2))), P)
    assert np.array_equal(g.values, [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    with pytest.raises(NegativePQSum):
        pv.map_forward(g, LatticeParams(1.0, -2.0))


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_map_roundtrip(n0, m0):
    g = Grid(n0, m0, np.random.default_rng(abs(n0 * 41 + m0)).normal(size=(6, 5)))
    back = pv.map_backward(pv.map_forward(g, P), P)
    assert np.max(np.abs(back.values - g.values)) < 1e-13


def test_map_pulls_back_solutions(one_sol):
    assert pv.reduced_residual_max(pv.map_backward(one_sol, P), P) < 1e-9


def test_reduced_residual_examples():
    assert pv.reduced_residual(0.0, 1.0, 0.0, 1.0, P) == 0.0
    assert pv.reduced_residual(0.0, 2.0, 1.0, 3.0, P) == 2.0
    assert pv.reduced_residual_field(Grid(0, 0, np.zeros((3, 3))), P).shape == (2, 2)


def test_constraint_errors():
    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0)
    g = Grid(0, 0, np.zeros((4, 4)))
    with pytest.raises(OutOfWindow):
        pv.constraint_residual(0, 1, g, rp)
    with pytest.raises(ZeroDifference):
        pv.constraint_residual(1, 1, g, rp)
    with pytest.raises(ZeroDifference):
        pv.constraint_field(g, rp)


def test_generated_grid(generated):
    rp, g = generated
    assert g.shape == (20, 20)
    assert np.max(np.abs(pv.constraint_field(g, rp))) < 1e-7
    assert pv.reduced_residual_max(g, rp) < 1e-9
    assert residual_max(pv.map_forward(g, P), P) < 1e-9
    a_def, b_def = pv.identity_defects(g, rp)
    assert a_def < 1e-10 and b_def < 1e-10
    cf = pv.constraint_field(g, rp)
    assert pv.constraint_residual(5, 6, g, rp) == pytest.approx(cf[5 - g.n0 - 1, 6 - g.m0 - 1])


def test_newton_failure_is_reported():
    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0)
    with pytest.raises(NewtonFailure) as info:
        pv.painleve_generate(rp, perturbation=2.0)
    assert "residual" in info.value.one_line()
    with pytest.raises(ValueError):
        pv.painleve_generate(rp, n_cols=3, m_rows=3)


@pytest.mark.parametrize("key", sorted(pv.STRIP_SEEDS))
def test_recurrence_tracks_constrained_rows(key):
    rp = pv.ReductionParams(*key, 2.0, 1.0, m=1)
    strip = pv.constrained_strip(rp, pv.STRIP_SEEDS[key], 40)
    assert np.max(np.abs(pv.constraint_field(strip, rp))) < 1e-9
    states = pv.trajectory(pv.state_from_grid(strip, 2, 1), rp, 36)
    assert len(states) == 37
    assert max(abs(s.u_cur - strip.u(s.n, 1)) for s in states) < 1e-8


def test_printed_form_diverges_from_rows_when_k_nonzero():
    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0, m=1)
    strip = pv.constrained_strip(rp, pv.STRIP_SEEDS[(1.0, 0.1)], 12)
    st0 = pv.state_from_grid(strip, 2, 1)
    good = pv.painleve_step(st0, rp)
    bad = pv.painleve_step(st0, rp, form="printed")
    assert abs(good.u_next - strip.u(4, 1)) < 1e-10
    assert abs(bad.u_next - strip.u(4, 1)) > 1e-3
    flat = pv.ReductionParams(0.0, 0.1, 2.0, 1.0, m=1)
    assert pv.painleve_step(st0, flat) == pv.painleve_step(st0, flat, form="printed")


def test_step_singularities():
    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0)
    with pytest.raises(SingularStep):
        pv.painleve_step(pv.PainleveState(1, 1.0, 0.0, 0.0, 0.0), rp)
    with pytest.raises(SingularStep):
        pv.painleve_step(pv.PainleveState(1, -1.0, 1.0, 0.0, 0.0), rp)
    with pytest.raises(ValueError):
        pv.painleve_step(pv.PainleveState(1, 1.0, 1.0, 0.0, 0.0), rp, form="other")


def test_lattice_side_construction_agrees():
    r0 = pv.ReductionParams(0.0, 0.0, 2.0, 1.0, m=1)
    strip = pv.constrained_strip(r0, pv.STRIP_SEEDS[(0.0, 0.0)], 40)
    lp = pv.map_forward(strip, P)
    alt = pv.yy_invariant_strip(P, (lp.u(1, 1), lp.u(2, 0), lp.u(2, 1), lp.u(2, 2)), 40)
    assert np.max(np.abs(alt.values - lp.values)) < 1e-10 * np.max(np.abs(lp.values))
    assert residual_max(alt, P) < 1e-9 * np.max(np.abs(lp.values))


def test_trajectory_csv():
    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0, m=1)
    strip = pv.constrained_strip(rp, pv.STRIP_SEEDS[(1.0, 0.1)], 12)
    text = pv.trajectory_to_csv(pv.trajectory(pv.state_from_grid(strip, 2, 1), rp, 3), rp)
    lines = text.splitlines()
    assert lines[0] == rp.header() and lines[1] == "n,y,u" and len(lines) == 6
    n, y, u = lines[2].split(",")
    assert int(n) == 2 and float(u) == strip.u(2, 1)


def test_far_soliton_pulls_back():
    g = soliton_grid(SolitonSpec.single(0.8, 2.0), P, 30, -40, 10, 10)
    assert pv.reduced_residual_max(pv.map_backward(g, P), P) < 1e-8
