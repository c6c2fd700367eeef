"""Lie point symmetries of the quad equation and its discrete symmetries.

The three point generators have characteristics

    X1 = 1,    X2 = (-1)^(n+m),    X3 = (-1)^(n+m) (u - p n - q m),

and close into a solvable algebra: ``[X1, X2] = 0``, ``[X1, X3] = X2``,
``[X2, X3] = X1`` with ``[F, G] = F dG/du - G dF/du``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OutOfWindow
from .lattice import Grid, LatticeParams, residual_gradient

TAGS = ("X1", "X2", "X3")


def _parity(n, m):
    return 1.0 - 2.0 * (np.asarray(n + m) % 2)


@dataclass(frozen=True)
class PointGenerator:
    """One of the generators ``X1``, ``X2``, ``X3``."""

    tag: str

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown point generator {self.tag!r}")

    radius_n = 0
    radius_m = 0

    def value(self, n, m, grid, params):
        return point_char(self, n, m, grid.u(n, m), params)

    def field(self, values, n, m, params):
        return point_char(self, n, m, values, params)


@dataclass(frozen=True)
class GroupParams:
    eps1: float = 0.0
    eps2: float = 0.0
    eps3: float = 0.0


def point_char(gen, n, m, u, params):
    """Characteristic of ``gen`` at ``(n, m)`` with field value ``u``."""
    tag = gen.tag if isinstance(gen, PointGenerator) else gen
    if tag == "X1":
        out = np.ones(np.broadcast(n, m, u).shape)
    elif tag == "X2":
        out = np.broadcast_to(_parity(n, m), np.broadcast(n, m, u).shape) * 1.0
    elif tag == "X3":
        out = _parity(n, m) * (u - params.p * n - params.q * m)
    else:
        raise ValueError(f"unknown point generator {tag!r}")
    return float(out) if np.ndim(out) == 0 else out


def point_char_du(gen, n, m, params):
    """Derivative of the characteristic with respect to ``u``."""
    tag = gen.tag if isinstance(gen, PointGenerator) else gen
    return 0.0 if tag in ("X1", "X2") else float(_parity(n, m))


def prolonged_defect(char, cell, grid, params):
    """Prolonged generator applied to the quad expression at ``cell``.

    ``char`` needs a ``value(n, m, grid, params)`` method. The result is the
    sum over the four corners of the residual gradient times the
    characteristic. The gradient entries on each diagonal are negatives of
    each other, so the sum is grouped by diagonal; constant and alternating
    characteristics then cancel exactly in floating point.
    """
    n, m = cell.n, cell.m
    corners = ((n, m), (n + 1, m), (n, m + 1), (n + 1, m + 1))
    for cn, cm in corners:
        if not grid.contains(cn, cm):
            raise OutOfWindow("quad outside grid", n=n, m=m)
    u = [grid.u(cn, cm) for cn, cm in corners]
    grad = residual_gradient(*u, params)
    f = [char.value(cn, cm, grid, params) for cn, cm in corners]
    return float((grad[0] * f[0] + grad[3] * f[3]) + (grad[1] * f[1] + grad[2] * f[2]))


def _finite_transform_values(values, nn, mm, gp, params):
    s = gp.eps3 * _parity(nn, mm)
    shift = gp.eps1 + gp.eps2 * _parity(nn, mm) - gp.eps3 * _parity(nn, mm) * (
        params.p * nn + params.q * mm
    )
    if abs(gp.eps3) < 1e-12:
        return values + shift
    es = np.exp(s)
    return es * values + np.expm1(s) / s * shift


def apply_finite_transform(grid, gp, params):
    """Finite group action generated by ``eps1 X1 + eps2 X2 + eps3 X3``.

    With ``s = eps3 (-1)^(n+m)`` the map is
    ``u -> e^s u + (e^s - 1)/s [eps1 + eps2 (-1)^(n+m) - eps3 (-1)^(n+m)(p n + q m)]``.
    """
    nn, mm = grid.index_arrays()
    return grid.with_values(_finite_transform_values(grid.values, nn, mm, gp, params))


def lie_bracket(a, b, n, m, u, params):
    """Evolutionary bracket ``a db/du - b da/du`` of two point generators."""
    fa = point_char(a, n, m, u, params)
    fb = point_char(b, n, m, u, params)
    return fa * point_char_du(b, n, m, params) - fb * point_char_du(a, n, m, params)


def lie_bracket_check(n_points=50, seed=0, params=None):
    """Evaluate the three brackets at random points against the algebra table.

    Returns a dict mapping ``"[Xi,Xj]"`` to the largest deviation from the
    expected characteristic.
    """
    params = params or LatticeParams(2.0, 1.0)
    rng = np.random.default_rng(seed)
    ns = rng.integers(-50, 50, n_points)
    ms = rng.integers(-50, 50, n_points)
    us = rng.uniform(-5.0, 5.0, n_points)
    table = {("X1", "X2"): None, ("X1", "X3"): "X2", ("X2", "X3"): "X1"}
    report = {}
    for (a, b), expect in table.items():
        worst = 0.0
        for n, m, u in zip(ns, ms, us):
            got = lie_bracket(a, b, int(n), int(m), float(u), params)
            ref = 0.0 if expect is None else point_char(expect, int(n), int(m), float(u), params)
            worst = max(worst, abs(got - ref))
        report[f"[{a},{b}]"] = worst
    return report


def apply_discrete_symmetry(grid, which, params):
    """Apply one of the three discrete symmetries.

    ``swap_nm`` transposes and exchanges p and q. ``reflect_n`` sets
    ``u'(n, m) = u(n_min + n_max + 1 - n, m)`` and ``p -> -p``; the quad at
    ``n`` is the mirror of the quad at ``n_min + n_max - n`` with its n and n+1
    columns exchanged, which is why the window origin moves by one.
    ``reflect_m`` is the same construction along m with ``q -> -q``.
    """
    v = grid.values
    p, q = params.p, params.q
    ok = params.degenerate_ok
    if which == "swap_nm":
        return Grid(grid.m0, grid.n0, v.T), LatticeParams(q, p, ok)
    if which == "reflect_n":
        return Grid(grid.n0 + 1, grid.m0, v[::-1, :]), LatticeParams(-p, q, ok)
    if which == "reflect_m":
        return Grid(grid.n0, grid.m0 + 1, v[:, ::-1]), LatticeParams(p, -q, ok)
    raise ValueError(f"unknown discrete symmetry {which!r}")
