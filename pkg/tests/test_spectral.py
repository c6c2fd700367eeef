import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpkdv import spectral as sp
from lpkdv.errors import InvalidSpec, OutOfWindow, PoleAtQ
from lpkdv.lattice import Grid, LatticeParams
from lpkdv.soliton import PotentialView, SolitonMode, SolitonSpec, soliton_grid, two_soliton

P = LatticeParams(2.0, 1.0)
ONE = SolitonSpec.single(0.5, 1.0)
TWO = SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0)))


def test_lax_matrices_on_zero_grid():
    lp = sp.lax_matrices(0, 0, Grid(0, 0, np.zeros((3, 3))), P, 0.0)
    assert np.array_equal(lp.L, [[2.0, 1.0], [0.0, 2.0]])
    assert np.array_equal(lp.M, [[1.0, 1.0], [0.0, 1.0]])
    lp = sp.lax_matrices(0, 0, Grid(0, 0, np.zeros((3, 3))), P, 1.0)
    assert np.array_equal(lp.L, [[2.0, 1.0], [1.0, 2.0]])
    assert np.linalg.det(lp.L) == pytest.approx(3.0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-10, 10))
def test_determinants(u00, u10, u01, h2):
    g = Grid(0, 0, np.array([[u00, u01], [u10, 0.0]]))
    lp = sp.lax_matrices(0, 0, g, P, h2)
    assert np.linalg.det(lp.L) == pytest.approx(P.p**2 - h2, abs=1e-9 * (1 + abs(h2) + 10))
    assert np.linalg.det(lp.M) == pytest.approx(P.q**2 - h2, abs=1e-9 * (1 + abs(h2) + 10))


@pytest.mark.parametrize("h2", [-1.0, 0.0, 1.0, 5.0])
def test_compatibility_on_solutions(h2):
    for spec in (ONE, TWO):
        g = soliton_grid(spec, P, -20, -20, 40, 40)
        assert sp.lax_compatibility_defect(g, P, h2) < 1e-10


def test_compatibility_fails_off_shell(rng):
    g = Grid(0, 0, rng.uniform(-1, 1, (5, 5)))
    assert sp.lax_compatibility_defect(g, P, 0.5) > 1e-3
    with pytest.raises(OutOfWindow):
        sp.lax_compatibility_defect(g, P, 0.5, region=(0, 0, 4, 4))
    with pytest.raises(OutOfWindow):
        sp.lax_matrices(4, 0, g, P, 0.0)


@pytest.mark.parametrize("h2", [-0.25, -1.0, 0.0, 5.0])
def test_scalar_recursion(h2):
    for spec in (ONE, TWO):
        g = soliton_grid(spec, P, -20, -5, 40, 12)
        assert sp.scalar_recursion_check(g, P, h2, (1.0, 1.0)) < 1e-9


def test_scalar_recursion_rejects_off_shell(rng):
    g = Grid(0, 0, rng.uniform(-1, 1, (12, 6)))
    assert sp.scalar_recursion_check(g, P, 0.0, (1.0, 1.0)) > 1e-3


def test_evolution_factor():
    assert sp.reflection_evolution_factor(0.5, P) == pytest.approx(3.0)
    with pytest.raises(PoleAtQ):
        sp.reflection_evolution_factor(1.0, P)
    c = sp.norming_constants(TWO, 2, P)
    assert c[0] == pytest.approx(9.0)
    assert c[1] == pytest.approx(2.0 * 81.0)


def test_jost_products_rebuild_the_soliton():
    n = np.arange(-15, 15)
    mu1, mu2, _ = sp.jost_reflectionless(2, n, 3, TWO, P)
    e = [c * ((2 + k) / (2 - k)) ** n for c, k in zip(sp.norming_constants(TWO, 3, P), (0.5, 0.8))]
    assert np.max(np.abs(e[0] * mu1 + e[1] * mu2 - two_soliton(n, 3, TWO, P))) < 1e-12
    mu = sp.jost_reflectionless(1, 0, 0, ONE, P)
    assert mu == pytest.approx(0.5)
    with pytest.raises(InvalidSpec):
        sp.jost_reflectionless(2, 0, 0, ONE, P)


@pytest.mark.parametrize("spec, tol", [(ONE, 1e-8), (TWO, 1e-6)])
def test_reflectionless_reconstruction(spec, tol):
    g = soliton_grid(spec, P, -20, -20, 40, 40)
    view = PotentialView(g, P)
    cal = sp.calibrate_reconstruction(spec, P, view.eta(0, 0), 0, 0)
    assert cal == pytest.approx(-1.0, rel=1e-12)
    nn = np.arange(-20, 18)
    for m in range(-20, 20, 3):
        exact = np.array([view.eta(int(n), m) for n in nn])
        got = sp.reconstruct_eta_reflectionless(len(spec.modes), nn, m, spec, P, cal)
        assert np.max(np.abs(got - exact)) < tol


def test_reconstruction_rejects_negative_norming():
    with pytest.raises(InvalidSpec):
        sp.reconstruct_eta_from_data(0, (0.5,), (-1.0,), P)
