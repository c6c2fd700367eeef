"""Generalized symmetries: characteristics, defects, flows and brackets.

Characteristics are evaluated as whole-grid fields. A field has the shape of
the grid and holds ``NaN`` wherever the stencil does not fit, so margins are
tracked by ``NaN`` propagation rather than index bookkeeping. The potentials

    q_{n,m} = 2p - u_{n+2,m} + u_{n,m},    p_{n,m} = 2q - u_{n,m+2} + u_{n,m}

enter the n- and m-direction hierarchies. Every m-direction characteristic is
the n-direction one evaluated on the transposed grid with ``n <-> m`` and
``p <-> q``.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DivergentDenominator,
    InvalidW,
    NoDecay,
    OutOfWindow,
    RatioNotConstant,
    WindowTooSmall,
)
from .lattice import Grid, residual_gradient
from .point_symmetry import point_char

DENOM_TOL = 1e-12
DECAY_TOL = 1e-10

N_KINDS = ("Xn", "Yn1", "Y0n", "Sigma0", "Zn")
M_KINDS = {"Xm": "Xn", "Ym1": "Yn1", "Y0m": "Y0n", "Zm": "Zn"}
POINT_KINDS = ("X1", "X2", "X3")
VARIANTS = ("ms", "z1", "z2")

# Stencil radius along the characteristic's own direction.
_RADIUS = {"Yn1": 1, "Y0n": 0, "Sigma0": 1, "Zn": 1}
_X_RADIUS = {0: 1, 1: 2, 2: 3, 3: 4}
# Constants beta_k of the explicit inverse-hierarchy flows.
_BETA = {0: lambda p: 1.0 / (2.0 * p), 1: lambda p: -1.0 / (4.0 * p**3),
         2: lambda p: 3.0 / (16.0 * p**5)}


@dataclass(frozen=True)
class Characteristic:
    """Symmetry characteristic ``F_{n,m}`` of a generator ``F d/du``.

    Build instances with the module-level constructors (:func:`Xn`,
    :func:`Zn`, :func:`combined`, ...). ``Xn(3)``/``Xm(3)`` are generated by
    the truncated inverse recursion and are nonlocal towards increasing n
    (resp. m); their radius counts only the backward reach.
    """

    kind: str
    k: int = None
    w: float = None
    variant: str = None
    terms: tuple = ()

    def __post_init__(self):
        kind = self.kind
        if kind in ("Xn", "Xm"):
            if self.k not in (0, 1, 2, 3):
                raise ValueError(f"{kind} needs k in 0..3")
        elif kind in ("Zn", "Zm"):
            if self.variant not in VARIANTS or self.w is None:
                raise ValueError(f"{kind} needs w and variant in {VARIANTS}")
            object.__setattr__(self, "w", float(self.w))
        elif kind == "combined":
            terms = tuple((float(c), ch) for c, ch in self.terms)
            if not terms:
                raise ValueError("combined characteristic needs terms")
            object.__setattr__(self, "terms", terms)
        elif kind not in ("Yn1", "Ym1", "Y0n", "Y0m", "Sigma0") + POINT_KINDS:
            raise ValueError(f"unknown characteristic kind {kind!r}")

    # -- stencil -----------------------------------------------------------
    @property
    def radius_n(self):
        if self.kind == "combined":
            return max(ch.radius_n for _, ch in self.terms)
        if self.kind in POINT_KINDS or self.kind in M_KINDS:
            return 0
        if self.kind == "Xn":
            return _X_RADIUS[self.k]
        return _RADIUS[self.kind]

    @property
    def radius_m(self):
        if self.kind == "combined":
            return max(ch.radius_m for _, ch in self.terms)
        if self.kind in M_KINDS:
            return Characteristic(M_KINDS[self.kind], self.k, self.w, self.variant).radius_n
        return 0

    @property
    def is_nonlocal(self):
        if self.kind == "combined":
            return any(ch.is_nonlocal for _, ch in self.terms)
        return self.kind in ("Xn", "Xm") and self.k == 3

    # -- evaluation ----------------------------------------------------------
    def field(self, values, nn, mm, params):
        """Characteristic on every grid point; ``NaN`` where the stencil is cut."""
        p, q = params.p, params.q
        if self.kind == "combined":
            out = np.zeros(values.shape)
            for coef, ch in self.terms:
                out = out + coef * ch.field(values, nn, mm, params)
            return out
        if self.kind in POINT_KINDS:
            return np.asarray(point_char(self.kind, nn, mm, values, params), dtype=float)
        if self.kind in M_KINDS:
            mirror = Characteristic(M_KINDS[self.kind], self.k, self.w, self.variant)
            return _n_field(mirror, values.T, mm.T, nn.T, q, p).T
        return _n_field(self, values, nn, mm, p, q)

    def value(self, n, m, grid, params):
        return char_eval(self, n, m, grid, params)

    # -- serialisation -------------------------------------------------------
    def to_dict(self):
        if self.kind == "combined":
            return {
                "kind": "combined",
                "terms": [{"coef": c, "char": ch.to_dict()} for c, ch in self.terms],
            }
        out = {"kind": self.kind}
        if self.k is not None:
            out["k"] = self.k
        if self.w is not None:
            out["w"] = self.w
        if self.variant is not None:
            out["variant"] = self.variant
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        kind = data["kind"]
        if kind == "combined":
            return combined([(t["coef"], cls.from_dict(t["char"])) for t in data["terms"]])
        return cls(kind, data.get("k"), data.get("w"), data.get("variant"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __str__(self):
        if self.kind == "combined":
            return " + ".join(f"{c:g}*{ch}" for c, ch in self.terms)
        if self.kind in ("Xn", "Xm"):
            return f"{self.kind}({self.k})"
        if self.kind in ("Zn", "Zm"):
            return f"{self.kind}({self.w:g},{self.variant})"
        return self.kind


def Xn(k):
    return Characteristic("Xn", k=k)


def Xm(k):
    return Characteristic("Xm", k=k)


def Zn(w, variant="ms"):
    return Characteristic("Zn", w=w, variant=variant)


def Zm(w, variant="ms"):
    return Characteristic("Zm", w=w, variant=variant)


def named(kind):
    """Parameter-free kinds: ``Yn1``, ``Ym1``, ``Y0n``, ``Y0m``, ``Sigma0``, ``X1``..``X3``."""
    return Characteristic(kind)


def combined(terms):
    return Characteristic("combined", terms=tuple(terms))


def beta(k, p):
    """Integration constant of the explicit flow ``Xn(k)``; zero for k = 3."""
    return _BETA[k](p) if k in _BETA else 0.0


# ----------------------------------------------------------------- fields


def _shift(a, di):
    """``out[i, :] = a[i + di, :]`` with ``NaN`` fill."""
    out = np.full(a.shape, np.nan)
    n = a.shape[0]
    if di >= 0:
        if di < n:
            out[: n - di] = a[di:]
    elif -di < n:
        out[-di:] = a[: n + di]
    return out


def _checked_recip(x):
    bad = np.isfinite(x) & (np.abs(x) < DENOM_TOL)
    if bad.any():
        raise DivergentDenominator("potential denominator vanishes")
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / x


def _q_recips(values, p, offsets):
    """``{k: 1/q_{n+k}}`` as fields."""
    q0 = 2.0 * p - _shift(values, 2) + values
    return {k: _checked_recip(_shift(q0, k)) for k in offsets}


def _powers(w, p, q):
    pw, qw = p**w, q**w
    if not (np.isfinite(pw) and np.isfinite(qw)) or np.iscomplexobj(pw):
        raise InvalidW("p**w and q**w must be real", w=w)
    return float(pw), float(qw)


def _n_field(c, values, nn, mm, p, q):
    kind = c.kind
    if kind == "Xn":
        if c.k == 3:
            return _generated_x3(values, p)
        r = _q_recips(values, p, (-3, -2, -1, 0, 1))
        if c.k == 0:
            return -r[-1] + 1.0 / (2.0 * p)
        if c.k == 1:
            return r[-1] ** 2 * (r[0] + r[-2]) - 1.0 / (4.0 * p**3)
        inner_a = r[-2] * (r[0] * r[-1] + r[-1] * r[-2] + r[-2] * r[-3])
        inner_b = r[0] * (r[1] * r[0] + r[0] * r[-1] + r[-1] * r[-2])
        return -(r[-1] ** 2) * (inner_a + inner_b) + 3.0 / (16.0 * p**5)
    if kind == "Y0n":
        return values - p * nn
    r1 = _q_recips(values, p, (-1,))[-1]
    if kind == "Yn1":
        return nn * r1
    if kind == "Sigma0":
        return (2.0 * nn - values - 1.0) / (2.0 * p * p) + (2.0 * nn - 1.0) * r1
    if kind == "Zn":
        pw, qw = _powers(c.w, p, q)
        if c.variant == "ms":
            coef = (pw - qw) / (2.0 * (p * p - q * q))
            return nn * pw * r1 - coef * (p * nn - values / 2.0)
        if pw == qw:
            raise InvalidW("variant needs p**w != q**w", w=c.w, variant=c.variant)
        lead = pw + qw if c.variant == "z1" else (p * q) ** c.w
        return nn * lead * r1 - values / (pw - qw)
    raise ValueError(f"no n-field for kind {kind!r}")


def _generated_x3(values, p):
    f = _n_field(Xn(2), values, None, None, p, None)
    out = np.empty(values.shape)
    for j in range(values.shape[1]):
        out[:, j] = _inverse_recursion_line(f[:, j], values[:, j], p, 0.0, DECAY_TOL)
    return out


def _inverse_recursion_line(f, u, p, alpha, decay_tol):
    """Truncated ``-E^-1 (1/q) D+ (D-)^-1 (1/q) D+ D-`` on one line.

    ``D+ = E + 1`` and ``D- = E - 1``; ``(D-)^-1`` is ``-sum_{k>=0} E^k`` plus
    the kernel constant ``alpha``. Beyond the last finite entry ``f`` is
    continued by 0 and ``q`` by its asymptotic value ``2p``, after checking
    that both have decayed there.
    """
    f = np.asarray(f, dtype=float)
    u = np.asarray(u, dtype=float)
    n = f.size
    q = np.full(n + 2, 2.0 * p)
    q[: n - 2] = 2.0 * p - u[2:] + u[:-2]
    finite_f = np.flatnonzero(np.isfinite(f))
    finite_q = np.flatnonzero(np.isfinite(q[: n - 2]))
    if finite_f.size == 0 or finite_q.size == 0:
        return np.full(n, np.nan)
    last_f, last_q = finite_f[-1], finite_q[-1]
    scale = 1.0 + np.nanmax(np.abs(f))
    if abs(f[last_f]) > decay_tol * scale or abs(q[last_q] - 2.0 * p) > decay_tol:
        raise NoDecay(
            "sequence or potential has not decayed at the +edge",
            f_edge=f"{abs(f[last_f]):.3e}",
            q_edge=f"{abs(q[last_q] - 2.0 * p):.3e}",
        )
    fe = np.zeros(n + 2)
    fe[:n] = f
    fe[last_f + 1 :] = 0.0
    q[last_q + 1 :] = 2.0 * p
    g2 = (fe[2:] - fe[:n]) / q[:n]
    g3 = np.empty(n + 1)
    g3[:n] = alpha - np.cumsum(g2[::-1])[::-1]
    g3[n] = alpha
    g5 = (g3[1:] + g3[:n]) / q[:n]
    out = np.full(n, np.nan)
    out[1:] = -g5[:-1]
    return out


def apply_inverse_recursion(f, grid, params, m=None, alpha=0.0, decay_tol=DECAY_TOL):
    """Truncated inverse recursion operator applied along n at row ``m``.

    ``f`` is aligned with the grid columns. The first entry of the result is
    ``NaN`` (the operator reaches one site back). Raises :class:`NoDecay` when
    ``f`` or ``q - 2p`` exceed ``decay_tol`` at the +n edge.
    """
    m = grid.m0 if m is None else m
    if not grid.contains(grid.n0, m):
        raise OutOfWindow("row outside grid", m=m)
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_cols,):
        raise ValueError("f must have one entry per grid column")
    u = grid.values[:, m - grid.m0]
    return _inverse_recursion_line(f, u, params.p, alpha, decay_tol)


def char_field(c, grid, params):
    nn, mm = grid.index_arrays()
    return c.field(np.asarray(grid.values), nn, mm, params)


def char_eval(c, n, m, grid, params):
    """Characteristic ``c`` at ``(n, m)``."""
    if not grid.contains(n, m):
        raise OutOfWindow("point outside grid", n=n, m=m)
    rn, rm = c.radius_n, c.radius_m
    if c.is_nonlocal:
        sub = grid
    else:
        i0, j0 = n - grid.n0, m - grid.m0
        if (i0 < rn or j0 < rm or i0 + rn >= grid.n_cols or j0 + rm >= grid.m_rows):
            raise OutOfWindow("stencil leaves the grid", n=n, m=m)
        sub = grid.window(n - rn, m - rm, 2 * rn + 1, 2 * rm + 1)
    val = char_field(c, sub, params)[n - sub.n0, m - sub.m0]
    if not np.isfinite(val):
        raise OutOfWindow("stencil leaves the grid", n=n, m=m)
    return float(val)


# ------------------------------------------------------------------ defects


def defect_field(c, grid, params, field=None):
    """Prolonged characteristic applied to the quad expression, per quad."""
    v = np.asarray(grid.values)
    f = char_field(c, grid, params) if field is None else field
    d00, d10, d01, d11 = residual_gradient(v[:-1, :-1], v[1:, :-1], v[:-1, 1:], v[1:, 1:], params)
    return (d00 * f[:-1, :-1] + d11 * f[1:, 1:]) + (d10 * f[1:, :-1] + d01 * f[:-1, 1:])


def symmetry_defect(c, grid, params):
    """Largest absolute defect over the quads where the stencil fits."""
    d = defect_field(c, grid, params)
    ok = np.isfinite(d)
    if not ok.any():
        raise OutOfWindow("no quad admits the characteristic stencil")
    return float(np.max(np.abs(d[ok])))


class MirrorPairResult(NamedTuple):
    combined: Characteristic
    alpha_g: np.ndarray
    beta_g: np.ndarray


def combine_mirror_pair(zn, zm, grid, params, rtol=1e-6, floor=1e-3):
    """Combine a mirror pair whose defects are proportional quad by quad.

    With ``g = -pr(zn) D`` per quad, ``alpha' = pr(zn) D / g = -1`` and
    ``beta' = pr(zm) D / g``. When ``beta'`` is constant the combination
    ``zn / alpha' - zm / beta'``, rescaled so that zn has coefficient 1, is a
    symmetry. Quads where either defect is below ``floor`` times its maximum
    are skipped, since the ratio is 0/0 there.
    """
    a = defect_field(zn, grid, params)
    b = defect_field(zm, grid, params)
    ok = np.isfinite(a) & np.isfinite(b)
    if not ok.any():
        raise OutOfWindow("no quad admits both stencils")
    a, b = a[ok], b[ok]
    amax, bmax = np.max(np.abs(a)), np.max(np.abs(b))
    if amax == 0.0 or bmax == 0.0:
        raise RatioNotConstant("one of the defects vanishes identically")
    use = (np.abs(a) > floor * amax) & (np.abs(b) > floor * bmax)
    if not use.any():
        raise RatioNotConstant("no quad with both defects above the floor")
    g = -a[use]
    alpha_g = a[use] / g
    beta_g = b[use] / g
    ref = beta_g[np.argmax(np.abs(g))]
    spread = float(np.max(np.abs(beta_g - ref)))
    if spread > rtol * abs(ref):
        raise RatioNotConstant(
            "defect ratio varies across quads", spread=f"{spread:.3e}", ref=f"{ref:.6g}"
        )
    alpha = -1.0
    comb = combined([(1.0, zn), (-alpha / ref, zm)])
    return MirrorPairResult(comb, alpha_g, beta_g)


# -------------------------------------------------------------------- flows


@dataclass(frozen=True)
class FlowResult:
    grid: Grid
    epsilon: float
    steps: int


def flow_margins(c, steps):
    """Cells lost on each side, ``(n, m)``, by ``steps`` four-stage steps."""
    return 4 * c.radius_n * steps, 4 * c.radius_m * steps


def flow_integrate(c, grid, params, eps_total, steps):
    """Integrate ``du/deps = F`` with the classical four-stage scheme.

    Each stage widens the invalid border by the stencil radius, so each step
    costs ``4 * radius`` cells per side and the returned grid is the input
    window shrunk accordingly.
    """
    if c.is_nonlocal:
        raise ValueError("nonlocal characteristics cannot be flowed")
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be positive")
    mn, mm_ = flow_margins(c, steps)
    if grid.n_cols - 2 * mn < 1 or grid.m_rows - 2 * mm_ < 1:
        raise WindowTooSmall(
            "window too small for the flow margin",
            need=f"{2 * mn + 1}x{2 * mm_ + 1}",
            have=f"{grid.n_cols}x{grid.m_rows}",
        )
    nn, mmi = grid.index_arrays()
    u = np.array(grid.values, dtype=float)
    h = float(eps_total) / steps

    def rhs(x):
        return c.field(x, nn, mmi, params)

    with np.errstate(invalid="ignore"):
        for _ in range(steps):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * h * k1)
            k3 = rhs(u + 0.5 * h * k2)
            k4 = rhs(u + h * k3)
            u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = u[mn : grid.n_cols - mn, mm_ : grid.m_rows - mm_]
    if not np.all(np.isfinite(out)):
        raise DivergentDenominator("flow produced non-finite values")
    return FlowResult(Grid(grid.n0 + mn, grid.m0 + mm_, out), float(eps_total), steps)


# ----------------------------------------------------------------- brackets


def _directional(b, values, direction, nn, mm, params, h):
    with np.errstate(invalid="ignore"):
        plus = b.field(values + h * direction, nn, mm, params)
        minus = b.field(values - h * direction, nn, mm, params)
    return (plus - minus) / (2.0 * h)


def prolonged_action(a, b, grid, params):
    """``pr_a(b)``: derivative of ``b`` along the infinitesimal flow of ``a``.

    Central differences with step ``h = 1e-6 (1 + max|u|)`` and one Richardson
    level, ``(4 D(h/2) - D(h)) / 3``.
    """
    nn, mm = grid.index_arrays()
    values = np.asarray(grid.values, dtype=float)
    direction = a.field(values, nn, mm, params)
    h = 1e-6 * (1.0 + float(np.max(np.abs(values))))
    d1 = _directional(b, values, direction, nn, mm, params, h)
    d2 = _directional(b, values, direction, nn, mm, params, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def commutator_field(a, b, grid, params):
    """Evolutionary bracket ``[a, b] = pr_a(b) - pr_b(a)`` on the whole grid."""
    return prolonged_action(a, b, grid, params) - prolonged_action(b, a, grid, params)


def commutator_eval(a, b, n, m, grid, params):
    """Evolutionary bracket ``pr_a(b) - pr_b(a)`` at ``(n, m)``."""
    if not grid.contains(n, m):
        raise OutOfWindow("point outside grid", n=n, m=m)
    val = commutator_field(a, b, grid, params)[n - grid.n0, m - grid.m0]
    if not np.isfinite(val):
        raise OutOfWindow("bracket stencil leaves the grid", n=n, m=m)
    return float(val)


def flow_commutation_defect(a, b, grid, params, eps, steps):
    """Largest pointwise gap between ``exp(eps b) exp(eps a) u`` and the reverse order.

    Both compositions are compared on their common window.
    """
    ab = flow_integrate(b, flow_integrate(a, grid, params, eps, steps).grid, params, eps, steps).grid
    ba = flow_integrate(a, flow_integrate(b, grid, params, eps, steps).grid, params, eps, steps).grid
    n0, m0 = max(ab.n0, ba.n0), max(ab.m0, ba.m0)
    n1 = min(ab.n0 + ab.n_cols, ba.n0 + ba.n_cols)
    m1 = min(ab.m0 + ab.m_rows, ba.m0 + ba.m_rows)
    if n1 <= n0 or m1 <= m0:
        raise WindowTooSmall("compositions share no window")
    x = ab.window(n0, m0, n1 - n0, m1 - m0).values
    y = ba.window(n0, m0, n1 - n0, m1 - m0).values
    return float(np.max(np.abs(x - y)))
