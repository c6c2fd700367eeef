"""Verification suites shared by the command line and the test-suite.

Each suite is a function ``(config) -> list[Case]``. A case passes when its
metric is at most its tolerance, except for witness cases (flagged in
``details``) that certify a failure and pass when the metric exceeds the
tolerance or the expected error is raised.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import continuum as ct
from . import gen_symmetry as gs
from . import painleve as pv
from . import point_symmetry as ps
from . import spectral as sp
from .errors import NewtonFailure, RatioNotConstant, WindowTooSmall
from .lattice import (
    Cell,
    Grid,
    LatticeParams,
    Staircase,
    check_3d_consistency,
    evolve,
    factored_degenerate,
    grid_from_csv,
    grid_to_csv,
    residual,
    residual_max,
    solve_corner,
)
from .soliton import PotentialView, SolitonMode, SolitonSpec, centered_window, log_bases, soliton_grid

SCHEMA = "1"
DEFAULT_SEED = 20240101
DEFAULT_SPEC = SolitonSpec.single(0.5, 1.0)
WITNESS = "witness: passes when the failure is observed"


@dataclass
class Case:
    name: str
    metric: float
    tolerance: float
    passed: bool
    details: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "metric": float(self.metric),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "details": self.details,
        }


@dataclass
class Config:
    params: LatticeParams = field(default_factory=lambda: LatticeParams(2.0, 1.0))
    window: tuple = None  # (n0, m0, N, M); defaults to a 40x40 window on the core
    seed: int = DEFAULT_SEED
    tol: dict = field(default_factory=dict)  # case name (or "*") -> tolerance


def _tol(cfg, name, default):
    return float(cfg.tol.get(name, cfg.tol.get("*", default)))


def _le(cfg, name, metric, default, details=""):
    t = _tol(cfg, name, default)
    metric = float(metric)
    return Case(name, metric, t, bool(metric <= t), details)


def _gt(cfg, name, metric, default, details=WITNESS):
    t = _tol(cfg, name, default)
    metric = float(metric)
    return Case(name, metric, t, bool(metric > t), details)


def _raises(cfg, name, exc, func, details=WITNESS):
    try:
        func()
    except exc as err:
        return Case(name, 1.0, 0.0, True, f"{details}; raised {err.one_line()}")
    return Case(name, 0.0, 0.0, False, f"{details}; nothing raised")


def default_grid(cfg, spec=DEFAULT_SPEC):
    if cfg.window is None:
        n0, m0 = centered_window(spec, cfg.params, 40, 40)
        return soliton_grid(spec, cfg.params, n0, m0, 40, 40)
    n0, m0, N, M = cfg.window
    return soliton_grid(spec, cfg.params, n0, m0, N, M)


def soliton_matrix():
    """The parameter matrix: 12 one-soliton and 4 two-soliton configurations.

    For each ``(p, q)`` the three one-soliton modes pair ``kappa0`` in
    ``(0.3, 0.5, 0.8 min(p, q))`` with ``c0`` in ``(0.5, 1, 2)``; the two-soliton
    case combines ``(0.5, 1)`` with ``(0.8 min(p, q), 2)``.
    """
    one, two = [], []
    for p in (2.0, 3.0):
        for q in (1.0, 1.5):
            params = LatticeParams(p, q)
            kmax = 0.8 * min(p, q)
            for kappa, c0 in zip((0.3, 0.5, kmax), (0.5, 1.0, 2.0)):
                one.append((params, SolitonSpec.single(kappa, c0)))
            two.append((params, SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(kmax, 2.0)))))
    return one, two


def matrix_grids(size=40):
    one, two = soliton_matrix()
    out = []
    for params, spec in one + two:
        n0, m0 = centered_window(spec, params, size, size)
        out.append((params, spec, soliton_grid(spec, params, n0, m0, size, size)))
    return out


# ----------------------------------------------------------------- suites


def suite_lattice_core(cfg):
    params = cfg.params
    rng = np.random.default_rng(cfg.seed)
    cases = [_le(cfg, "residual-zero-grid", abs(residual(0.0, 0.0, 0.0, 0.0, LatticeParams(2, 1))), 0.0)]

    trip = rng.uniform(-1.0, 1.0, (200, 3))
    worst = max(abs(residual(a, b, c, solve_corner(a, b, c, params), params)) for a, b, c in trip)
    cases.append(_le(cfg, "corner-solve-residual", worst, 1e-12))

    g = default_grid(cfg)
    cases.append(_le(cfg, "soliton-residual", residual_max(g, params), 1e-9))
    rebuilt = evolve(Staircase.from_grid(g, "lower-right"), params)
    cases.append(_le(cfg, "evolve-reproduces-soliton", np.max(np.abs(rebuilt.values - g.values)), 1e-9))

    seeds = rng.uniform(-0.2, 0.2, (1000, 4))
    worst = max(check_3d_consistency(*s, 3.0, 2.0, 1.0) for s in seeds)
    cases.append(_le(cfg, "cube-consistency", worst, 1e-10, "1000 seeds, p=3 q=2 r=1"))

    pq = LatticeParams(1.5, 1.5, degenerate_ok=True)
    vals = rng.uniform(-2.0, 2.0, (200, 4))
    worst = max(abs(factored_degenerate(*v, 1.5) + residual(*v, pq)) for v in vals)
    cases.append(_le(cfg, "factored-form-at-p-eq-q", worst, 1e-12))

    back, bp = grid_from_csv(grid_to_csv(g, params))
    ok = back == g and bp.p == params.p and bp.q == params.q
    cases.append(_le(cfg, "csv-roundtrip", 0.0 if ok else 1.0, 0.0))
    return cases


def suite_soliton(cfg):
    cases = []
    grids = matrix_grids()
    one = [residual_max(g, p) for p, s, g in grids if len(s.modes) == 1]
    two = [residual_max(g, p) for p, s, g in grids if len(s.modes) == 2]
    cases.append(_le(cfg, "one-soliton-matrix", max(one), 1e-9, f"{len(one)} configurations"))
    cases.append(_le(cfg, "two-soliton-matrix", max(two), 1e-9, f"{len(two)} configurations"))
    spec = SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0)))
    cases.append(_le(cfg, "spec-json-roundtrip", 0.0 if SolitonSpec.from_json(spec.to_json()) == spec else 1.0, 0.0))
    return cases


def suite_point_symmetry(cfg):
    params = cfg.params
    rng = np.random.default_rng(cfg.seed)
    noise = Grid(0, 0, rng.uniform(-3.0, 3.0, (12, 12)))
    cells = [Cell(n, m) for n in range(11) for m in range(11)]
    cases = []
    for tag in ("X1", "X2"):
        gen = ps.PointGenerator(tag)
        worst = max(abs(ps.prolonged_defect(gen, c, noise, params)) for c in cells)
        cases.append(_le(cfg, f"{tag}-off-shell", worst, 0.0, "random non-solution grid"))
    x3 = ps.PointGenerator("X3")
    worst = 0.0
    for p, _, g in matrix_grids(12):
        cs = [Cell(n, m) for n in range(g.n0, g.n0 + 11) for m in range(g.m0, g.m0 + 11)]
        worst = max(worst, max(abs(ps.prolonged_defect(x3, c, g, p)) for c in cs))
    cases.append(_le(cfg, "X3-on-shell", worst, 1e-10))
    g = default_grid(cfg)
    moved = ps.apply_finite_transform(g, ps.GroupParams(0.3, -0.2, 0.1), params)
    cases.append(_le(cfg, "finite-transform-residual", residual_max(moved, params), 1e-9))
    for key, val in ps.lie_bracket_check(50, cfg.seed, params).items():
        cases.append(_le(cfg, f"bracket-{key}", val, 1e-8))
    for which in ("swap_nm", "reflect_n", "reflect_m"):
        g2, p2 = ps.apply_discrete_symmetry(g, which, params)
        cases.append(_le(cfg, f"discrete-{which}", residual_max(g2, p2), 1e-9))
    return cases


def _gs_grids(params):
    one = soliton_grid(DEFAULT_SPEC, params, -20, -20, 40, 40)
    two = soliton_grid(SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0))), params, -20, -20, 40, 40)
    return one, two


def suite_gen_symmetry(cfg):
    params = cfg.params
    grids = _gs_grids(params)
    cases = []
    yy = gs.combined([(1.0, gs.named("Yn1")), (1.0, gs.named("Ym1"))])
    chars = [gs.Xn(k) for k in range(3)] + [gs.Xm(k) for k in range(3)] + [yy]
    for c in chars:
        cases.append(_le(cfg, f"defect-{c}", max(gs.symmetry_defect(c, g, params) for g in grids), 1e-8))
    for w in (-1.0, 0.0, 0.5, 1.0, 2.0):
        for variant in ("ms", "z1", "z2"):
            if w == 0.0 and variant != "ms":
                continue
            worst = 0.0
            for g in grids:
                comb = gs.combine_mirror_pair(gs.Zn(w, variant), gs.Zm(w, variant), g, params).combined
                worst = max(worst, gs.symmetry_defect(comb, g, params))
            cases.append(_le(cfg, f"defect-Z(w={w:g},{variant})", worst, 1e-8))
    g = grids[0]
    cases.append(_gt(cfg, "witness-Yn1-alone", gs.symmetry_defect(gs.named("Yn1"), g, params), 1e-2))
    cases.append(_gt(cfg, "witness-Sigma0", gs.symmetry_defect(gs.named("Sigma0"), g, params), 1e-2))
    cases.append(
        _raises(
            cfg,
            "witness-Y0n-Y0m",
            RatioNotConstant,
            lambda: gs.combine_mirror_pair(gs.named("Y0n"), gs.named("Y0m"), g, params),
        )
    )
    cases.extend(commutator_cases(cfg))
    return cases


def commutator_data(params=None):
    """Bracket fields on a two-soliton strip, used for the commutator constants.

    One-soliton data cannot separate ``Xn(k)`` from ``Xn(0)`` and constants,
    so the fits use two interacting modes.
    """
    params = params or LatticeParams(2.0, 1.0)
    spec = SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0)))
    g = soliton_grid(spec, params, -80, -2, 170, 5)
    return g, params


def commutator_cases(cfg):
    g, params = commutator_data()
    p = params.p
    y = gs.named("Yn1")
    j = 2
    cases = []
    rng = np.random.default_rng(cfg.seed)
    for k, factor in ((0, 1.0), (1, 2.0)):
        bracket = gs.commutator_field(y, gs.Xn(k), g, params)[:, j]
        target = gs.char_field(gs.Xn(k + 1), g, params)[:, j] - gs.beta(k + 1, p)
        ok = np.flatnonzero(np.isfinite(bracket) & np.isfinite(target))
        pts = rng.choice(ok[10:-10], 50, replace=False)
        rel = np.abs(bracket[pts] + factor * target[pts]) / np.abs(factor * target[pts])
        cases.append(
            _le(cfg, f"bracket-Xn({k})-Yn1", np.max(rel), 1e-6, f"coefficient -{factor:g}, 50 interior points")
        )
    coef, resid = x3_bracket_coefficient(g, params)
    cases.append(
        _le(
            cfg,
            "bracket-Xn(2)-Yn1-coef-3/2",
            abs(coef + 1.5) / 1.5,
            1e-4,
            f"fitted coefficient {coef:.8f}; the hierarchy gives -3 (pattern -1, -2, -3)",
        )
    )
    cases.append(
        _le(cfg, "bracket-Xn(2)-Yn1-coef-3", abs(coef + 3.0) / 3.0, 1e-4, f"fit residual {resid:.2e}")
    )
    return cases


def x3_bracket_coefficient(g, params, row=2):
    """Coefficient of the generated ``Xn(3)`` in ``[Yn1, Xn(2)]`` on one row.

    The bracket is fitted on ``Xn(3)``, ``Xn(0)`` and a constant, since the
    inverse recursion fixes ``Xn(3)`` only up to lower symmetries. Returns
    ``(coefficient, max fit residual)``.
    """
    b = gs.commutator_field(gs.named("Yn1"), gs.Xn(2), g, params)[:, row]
    x3 = gs.char_field(gs.Xn(3), g, params)[:, row]
    x0 = gs.char_field(gs.Xn(0), g, params)[:, row]
    ok = np.isfinite(b) & np.isfinite(x3) & np.isfinite(x0)
    a = np.c_[x3[ok], x0[ok], np.ones(ok.sum())]
    co = np.linalg.lstsq(a, b[ok], rcond=None)[0]
    return float(co[0]), float(np.max(np.abs(a @ co - b[ok])))


def flow_order_ratios(params=None, eps=3.0, steps=(10, 20, 40)):
    """Quad residual after flowing ``Xn(0)`` with each step count, and the ratios."""
    params = params or LatticeParams(2.0, 1.0)
    g = soliton_grid(DEFAULT_SPEC, params, -170, -3, 340, 6)
    errs = [residual_max(gs.flow_integrate(gs.Xn(0), g, params, eps, s).grid, params) for s in steps]
    return errs, [a / b for a, b in zip(errs, errs[1:])]


def suite_flows(cfg):
    params = LatticeParams(2.0, 1.0)
    cases = []
    errs, ratios = flow_order_ratios(params)
    for i, r in enumerate(ratios):
        cases.append(_le(cfg, f"rk4-ratio-{i}", abs(r - 16.0), 4.0, f"ratio {r:.4f}, errors {errs[i]:.3e}/{errs[i + 1]:.3e}"))
    for b, (N, M) in ((gs.Xm(0), (200, 200)), (gs.Xm(1), (200, 360))):
        g = soliton_grid(DEFAULT_SPEC, params, -N // 2, -M // 2, N, M)
        d = gs.flow_commutation_defect(gs.Xn(0), b, g, params, 0.05, 20)
        cases.append(_le(cfg, f"flows-commute-Xn(0)-{b}", d, 1e-6, "eps=0.05 steps=20"))
    small = soliton_grid(DEFAULT_SPEC, params, -20, -20, 40, 40)
    cases.append(
        _raises(cfg, "window-too-small", WindowTooSmall, lambda: gs.flow_integrate(gs.Xn(0), small, params, 0.1, 20))
    )
    return cases


def suite_spectral(cfg):
    params = LatticeParams(2.0, 1.0)
    cases = []
    specs = (DEFAULT_SPEC, SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0))))
    grids = [soliton_grid(s, params, -20, -20, 40, 40) for s in specs]
    for h2 in (-1.0, 0.0, 1.0, 5.0):
        worst = max(sp.lax_compatibility_defect(g, params, h2) for g in grids)
        cases.append(_le(cfg, f"lax-compatibility-h2={h2:g}", worst, 1e-10))
    det_l = det_m = 0.0
    for g in grids:
        for h2 in (-1.0, 0.0, 1.0, 5.0):
            for n, m in ((0, 0), (3, -5), (-7, 2)):
                lp = sp.lax_matrices(n, m, g, params, h2)
                det_l = max(det_l, abs(np.linalg.det(lp.L) - (params.p**2 - h2)))
                det_m = max(det_m, abs(np.linalg.det(lp.M) - (params.q**2 - h2)))
    cases.append(_le(cfg, "det-L", det_l, 1e-10, "det L = p^2 - h2"))
    cases.append(_le(cfg, "det-M", det_m, 1e-10, "det M = q^2 - h2"))
    worst = 0.0
    for g in grids:
        w = g.window(-20, -5, 40, 12)
        # h2 = q^2 kills one m-branch and is excluded
        for h2 in (-0.25, -1.0, 0.0, 5.0):
            worst = max(worst, sp.scalar_recursion_check(w, params, h2, (1.0, 1.0)))
    cases.append(_le(cfg, "scalar-recursion", worst, 1e-9, "40x12 windows"))
    for spec, g, tol in zip(specs, grids, (1e-8, 1e-6)):
        n_modes = len(spec.modes)
        view = PotentialView(g, params)
        cal = sp.calibrate_reconstruction(spec, params, view.eta(0, 0), 0, 0)
        nn = np.arange(-20, 18)
        err = 0.0
        for m in range(-20, 20):
            exact = np.array([view.eta(int(n), m) for n in nn])
            err = max(err, np.max(np.abs(sp.reconstruct_eta_reflectionless(n_modes, nn, m, spec, params, cal) - exact)))
        cases.append(_le(cfg, f"reconstruction-N={n_modes}", err, tol, f"calibration {cal:.12g}"))
    worst = 0.0
    for kappa in (0.3, 0.5, 0.8):
        _, ly = log_bases(kappa, params)
        worst = max(worst, abs(sp.reflection_evolution_factor(kappa, params) / np.exp(ly) - 1.0))
    cases.append(_le(cfg, "m-evolution-factor", worst, 1e-15, "(q+k)/(q-k) against the soliton m-base"))
    return cases


def suite_continuum(cfg):
    params = LatticeParams(2.0, 1.0)
    cases = []
    res = ct.continuum_limit_order()
    errs = ", ".join(f"{e:.3e}" for e in res.errors)
    cases.append(_le(cfg, "continuum-order", abs(res.order - 1.0), 0.2, f"order {res.order:.4f}; errors {errs}"))
    zero = ct.continuum_limit_order(profile=lambda k: 0.0 * np.asarray(k, float))
    cases.append(_le(cfg, "zero-profile-exact", 0.0 if zero.status == "ExactMatch" else 1.0, 0.0, zero.status))
    g = soliton_grid(DEFAULT_SPEC, params, -100, 0, 200, 3)
    n = np.arange(-90, 90)
    direct = ct.miura_u_to_a(g, n, 1, params)
    chain = ct.miura_a(ct.miura_s(ct.q_from_grid(g, np.arange(-91, 90), 1, params), params.p))[1:]
    cases.append(_le(cfg, "miura-chain", np.max(np.abs(direct - chain)), 1e-14))
    q = ct.q_from_grid(g, np.arange(-100, 98), 0, params)
    mc = ct.miura_flow_consistency(ct.ContinuumState(q, -100, 0.0, params.p), 0.2, 10)
    cases.append(_le(cfg, "time-constant", abs(mc.time_scale - 1.0 / (2.0 * params.p)), 1e-12, f"c = {mc.time_scale:.15g}"))
    cases.append(_le(cfg, "miura-flow-q-s", mc.s_error, 1e-6, "tau=0.2"))
    cases.append(_le(cfg, "miura-flow-q-a", mc.a_error, 1e-6, "tau=0.2"))
    return cases


def suite_painleve(cfg):
    pr = LatticeParams(2.0, 1.0)
    rng = np.random.default_rng(cfg.seed)
    cases = []
    rand = Grid(-3, 2, rng.normal(size=(10, 10)))
    back = pv.map_backward(pv.map_forward(rand, pr), pr)
    cases.append(_le(cfg, "map-roundtrip", np.max(np.abs(back.values - rand.values)), 1e-14))
    sol = soliton_grid(DEFAULT_SPEC, pr, -20, -20, 40, 40)
    cases.append(_le(cfg, "map-pulls-back-solution", pv.reduced_residual_max(pv.map_backward(sol, pr), pr), 1e-9))

    rp = pv.ReductionParams(1.0, 0.1, 2.0, 1.0)
    g = pv.painleve_generate(rp)
    cases.append(_le(cfg, "generated-constraint", np.max(np.abs(pv.constraint_field(g, rp))), 1e-7, "20x20, w=1 c=0.1"))
    cases.append(_le(cfg, "generated-reduced-residual", pv.reduced_residual_max(g, rp), 1e-9))
    cases.append(_le(cfg, "generated-maps-to-solution", residual_max(pv.map_forward(g, pr), pr), 1e-9))
    a_def, b_def = pv.identity_defects(g, rp)
    cases.append(_le(cfg, "identity-a", a_def, 1e-10))
    cases.append(_le(cfg, "identity-b", b_def, 1e-10))
    cases.append(
        _raises(cfg, "newton-failure-reported", NewtonFailure, lambda: pv.painleve_generate(rp, perturbation=2.0))
    )
    for (w, c), seed in sorted(pv.STRIP_SEEDS.items()):
        r = pv.ReductionParams(w, c, 2.0, 1.0, m=1)
        strip = pv.constrained_strip(r, seed, 40)
        states = pv.trajectory(pv.state_from_grid(strip, 2, 1), r, 36)
        dev = max(abs(s.u_cur - strip.u(s.n, 1)) for s in states)
        cases.append(_le(cfg, f"track-w={w:g}-c={c:g}", dev, 1e-8, "36 steps along the constrained row"))
    r0 = pv.ReductionParams(0.0, 0.0, 2.0, 1.0, m=1)
    strip = pv.constrained_strip(r0, pv.STRIP_SEEDS[(0.0, 0.0)], 40)
    lp = pv.map_forward(strip, pr)
    alt = pv.yy_invariant_strip(pr, (lp.u(1, 1), lp.u(2, 0), lp.u(2, 1), lp.u(2, 2)), 40)
    rel = np.max(np.abs(alt.values - lp.values)) / np.max(np.abs(lp.values))
    cases.append(_le(cfg, "yy-constraint-path", rel, 1e-10, "relative, lpKdV-side construction"))
    return cases


SUITES = {
    "lattice-core": suite_lattice_core,
    "soliton": suite_soliton,
    "point-symmetry": suite_point_symmetry,
    "gen-symmetry": suite_gen_symmetry,
    "flows": suite_flows,
    "spectral": suite_spectral,
    "continuum": suite_continuum,
    "painleve": suite_painleve,
}


def run_suite(name, cfg=None):
    """Run one suite (or ``"all"``) and return the report dictionary."""
    cfg = cfg or Config()
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            raise KeyError(n)
    start = time.perf_counter()
    cases = []
    with np.errstate(all="ignore"):
        for n in names:
            sub = SUITES[n](cfg)
            if name == "all":
                for c in sub:
                    c.name = f"{n}/{c.name}"
            cases.extend(sub)
    return {
        "schema": SCHEMA,
        "suite": name,
        "seed": cfg.seed,
        "cases": [c.to_dict() for c in cases],
        "wallclock_seconds": time.perf_counter() - start,
    }


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"
