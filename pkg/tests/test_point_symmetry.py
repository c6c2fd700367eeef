import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpkdv.lattice import Cell, Grid, LatticeParams, residual_max
from lpkdv.point_symmetry import (
    GroupParams,
    PointGenerator,
    apply_discrete_symmetry,
    apply_finite_transform,
    lie_bracket_check,
    point_char,
    prolonged_defect,
)
from lpkdv.soliton import SolitonSpec, soliton_grid
from lpkdv.verify import matrix_grids

P = LatticeParams(2.0, 1.0)


def test_point_char_examples():
    assert point_char("X1", 4, 7, 3.3, P) == 1.0
    assert point_char("X2", 1, 2, 0.0, P) == -1.0
    assert point_char("X3", 1, 0, 0.0, P) == 2.0


@pytest.mark.parametrize("tag", ["X1", "X2"])
def test_off_shell_invariance(tag, rng):
    g = Grid(0, 0, rng.uniform(-5, 5, (9, 9)))
    gen = PointGenerator(tag)
    worst = max(abs(prolonged_defect(gen, Cell(n, m), g, P)) for n in range(8) for m in range(8))
    assert worst == 0.0


def test_x3_invariance(rng):
    x3 = PointGenerator("X3")
    for params, _, g in matrix_grids(12):
        for n in range(g.n0, g.n0 + 11):
            for m in range(g.m0, g.m0 + 11):
                assert abs(prolonged_defect(x3, Cell(n, m), g, params)) < 1e-10
    # The two factors' contributions cancel identically, so X3 also holds off shell.
    noise = Grid(0, 0, rng.uniform(-1, 1, (6, 6)))
    assert max(abs(prolonged_defect(x3, Cell(n, m), noise, P)) for n in range(5) for m in range(5)) < 1e-13


def test_finite_transform(one_sol):
    assert apply_finite_transform(one_sol, GroupParams(), P) == one_sol
    shifted = apply_finite_transform(one_sol, GroupParams(0.7, 0, 0), P)
    assert np.array_equal(shifted.values, one_sol.values + 0.7)
    moved = apply_finite_transform(one_sol, GroupParams(0.3, -0.2, 0.1), P)
    assert residual_max(moved, P) < 1e-9
    tiny = apply_finite_transform(one_sol, GroupParams(0.3, -0.2, 1e-13), P)
    near = apply_finite_transform(one_sol, GroupParams(0.3, -0.2, 0.0), P)
    assert np.max(np.abs(tiny.values - near.values)) < 1e-10


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_eps1_is_a_one_parameter_group(a, b):
    g = Grid(0, 0, np.linspace(-1, 1, 12).reshape(4, 3))
    ab = apply_finite_transform(apply_finite_transform(g, GroupParams(a), P), GroupParams(b), P)
    direct = apply_finite_transform(g, GroupParams(a + b), P)
    assert np.max(np.abs(ab.values - direct.values)) <= 4 * np.finfo(float).eps * (1 + abs(a) + abs(b))


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.5, 0.5))
def test_finite_transform_preserves_solutions(e1, e2, e3):
    g = soliton_grid(SolitonSpec.single(0.5, 1.0), P, -6, -6, 12, 12)
    assert residual_max(apply_finite_transform(g, GroupParams(e1, e2, e3), P), P) < 1e-9


def test_lie_brackets():
    rep = lie_bracket_check(50, 3, P)
    assert rep["[X1,X2]"] < 1e-10
    assert rep["[X1,X3]"] < 1e-8 and rep["[X2,X3]"] < 1e-8


def test_discrete_symmetries(one_sol):
    for which in ("swap_nm", "reflect_n", "reflect_m"):
        g2, p2 = apply_discrete_symmetry(one_sol, which, P)
        assert residual_max(g2, p2) < 1e-9
        assert residual_max(g2, P) > 1e-3 or which == "swap_nm"
    g2, p2 = apply_discrete_symmetry(one_sol, "swap_nm", P)
    assert (p2.p, p2.q) == (1.0, 2.0)
    g3, p3 = apply_discrete_symmetry(g2, "swap_nm", p2)
    assert g3 == one_sol and (p3.p, p3.q) == (P.p, P.q)
    c = Grid(0, 0, np.full((5, 5), 0.4))
    gc, pc = apply_discrete_symmetry(c, "reflect_n", P)
    assert np.all(gc.values == 0.4) and pc.p == -2.0 and residual_max(gc, pc) < 1e-14
