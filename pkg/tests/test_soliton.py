import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpkdv.errors import Degenerate, InvalidSpec, OutOfWindow
from lpkdv.lattice import Grid, LatticeParams, residual_max
from lpkdv.soliton import (
    PotentialView,
    SolitonMode,
    SolitonSpec,
    centered_window,
    one_soliton,
    soliton,
    soliton_grid,
    two_soliton,
)
from lpkdv.verify import soliton_matrix

P = LatticeParams(2.0, 1.0)
TWO = SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0)))

# Frozen from an independent 40-digit evaluation of the Cauchy-matrix form
# u = 1^T (I + M)^{-1} r with M_ij = r_i / (k_i + k_j), r_i = c0_i X_i^n Y_i^m.
CAUCHY_TWO = [
    ((0, 0), 0.95673505798394294),
    ((3, -2), 0.49075018297416352),
    ((-5, 4), 1.8076351381077636),
    ((10, 7), 2.5999480848448159),
    ((-12, -9), 1.1059218597957143e-7),
]
CAUCHY_ONE = [((0, 0), 0.5), ((3, -2), 0.33967391304347826), ((-5, 4), 0.86298667134338828)]


@pytest.mark.parametrize("nm, value", CAUCHY_ONE)
def test_one_soliton_oracle(nm, value):
    assert one_soliton(*nm, SolitonSpec.single(0.5, 1.0), P) == pytest.approx(value, rel=1e-14)


@pytest.mark.parametrize("nm, value", CAUCHY_TWO)
def test_two_soliton_oracle(nm, value):
    assert two_soliton(*nm, TWO, P) == pytest.approx(value, rel=1e-13, abs=1e-22)


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        one_soliton(0, 0, SolitonSpec.single(1.0, 1.0), P)
    with pytest.raises(InvalidSpec):
        SolitonSpec.single(-0.1, 1.0)
    with pytest.raises(Degenerate):
        SolitonSpec(((0.5, 1.0), (0.5, 2.0)))
    with pytest.raises(InvalidSpec):
        SolitonSpec.from_json('{"modes": [{"kappa": 1}]}')


def test_json_roundtrip():
    assert SolitonSpec.from_json(TWO.to_json()) == TWO
    assert '"kappa0"' in TWO.to_json()


def test_vacuum_limit():
    nn, mm = np.meshgrid(np.arange(-10, 10), np.arange(-10, 10), indexing="ij")
    assert np.all(one_soliton(nn, mm, SolitonSpec.single(0.5, 0.0), P) == 0.0)


def test_two_soliton_degenerates_to_one():
    spec = SolitonSpec(((0.5, 1.0), (0.8, 0.0)))
    nn, mm = np.meshgrid(np.arange(-15, 15), np.arange(-15, 15), indexing="ij")
    a = two_soliton(nn, mm, spec, P)
    b = one_soliton(nn, mm, SolitonSpec.single(0.5, 1.0), P)
    assert np.max(np.abs(a - b)) < 1e-15


def test_two_soliton_left_tail():
    assert abs(two_soliton(-40, 0, TWO, P)) < 1e-6


def test_far_window_is_finite():
    g = soliton_grid(TWO, P, -200, -200, 5, 5)
    assert np.all(np.isfinite(g.values))
    g = soliton_grid(TWO, P, 195, 195, 5, 5)
    assert np.max(np.abs(g.values - 2 * 0.8 - 2 * 0.5)) < 1e-12


@pytest.mark.parametrize("idx", range(16))
def test_matrix_residuals(idx):
    one, two = soliton_matrix()
    params, spec = (one + two)[idx]
    n0, m0 = centered_window(spec, params, 40, 40)
    assert residual_max(soliton_grid(spec, params, n0, m0, 40, 40), params) < 1e-9


def test_matrix_monotone_and_flat_on_wide_windows():
    # The core drifts across rows, so flat edges need about 280 columns.
    one, two = soliton_matrix()
    for params, spec in one + two:
        n0, m0 = centered_window(spec, params, 280, 40)
        v = soliton_grid(spec, params, n0, m0, 280, 40).values
        d = np.diff(v, axis=0)
        if len(spec.modes) == 1:
            assert np.all(d >= 0)
        assert np.max(np.abs(d[0])) < 1e-6 and np.max(np.abs(d[-1])) < 1e-6


@given(st.floats(0.05, 0.95), st.floats(0.01, 10.0), st.integers(-60, 60), st.integers(-60, 60))
def test_one_soliton_bounds(kappa, c0, n, m):
    u = soliton(n, m, SolitonSpec.single(kappa, c0), P)
    assert 0.0 <= u <= 2 * kappa


def test_potential_view(one_sol):
    view = PotentialView(Grid(0, 0, np.full((6, 6), 1.3)), P)
    assert view.eta(1, 1) == 0.0 and view.q_pot(1, 1) == 4.0 and view.p_pot(1, 1) == 2.0
    view = PotentialView(one_sol, P)
    assert view.q_pot(0, 0) - 2 * P.p == -(one_sol.u(2, 0) - one_sol.u(0, 0))
    with pytest.raises(OutOfWindow):
        view.eta(19, 0)
    far = PotentialView(soliton_grid(SolitonSpec.single(0.5, 1.0), P, 38, 0, 5, 3), P)
    assert abs(far.q_pot(40, 0) - 4.0) < 1e-6
    assert far.eta_array().shape == (3, 3)
