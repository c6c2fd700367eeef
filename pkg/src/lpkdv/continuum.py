"""Continuum limit in one lattice direction and the Miura chain.

With ``delta = p - q``, ``k = n + m`` and ``tau = delta * m`` the lattice
field ``u_{n,m} = v_k(tau)`` obeys, to first order in ``delta``,

    dv_k/dtau = 2p / (2p - v_{k+1} + v_{k-1}) - 1.

The potential ``q_k = 2p - v_{k+1} + v_{k-1}`` then solves
``dq_k/dtau = 2p (1/q_{k-1} - 1/q_{k+1})``; ``s_k = 2p/q_k`` solves the
discrete KdV equation ``ds_k/dtau' = s_k^2 (s_{k+1} - s_{k-1})`` and
``a_k = s_k s_{k-1}`` the Volterra equation ``da_k/dtau' = a_k (a_{k+1} -
a_{k-1})``, both in the rescaled time ``tau' = tau / (2p)``.

Sequences carry ``NaN`` where a stencil is cut, as in
:mod:`lpkdv.gen_symmetry`.
"""

import io
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DivergentDenominator, WindowTooSmall
from .lattice import LatticeParams, Staircase, evolve

DENOM_TOL = 1e-12


@dataclass(frozen=True)
class ContinuumState:
    """Sequence ``values[i]`` at site ``k0 + i`` and time ``tau``."""

    values: np.ndarray
    k0: int = 0
    tau: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def k_range(self):
        return np.arange(self.k0, self.k0 + self.values.size)


def _nb(x):
    """``(x_{k-1}, x_{k+1})`` with ``NaN`` at the ends."""
    lo = np.full(x.shape, np.nan)
    hi = np.full(x.shape, np.nan)
    lo[1:] = x[:-1]
    hi[:-1] = x[1:]
    return lo, hi


def _recip(x):
    if np.any(np.isfinite(x) & (np.abs(x) < DENOM_TOL)):
        raise DivergentDenominator("vanishing denominator in right-hand side")
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / x


def _vals(state_or_values):
    if isinstance(state_or_values, ContinuumState):
        return np.asarray(state_or_values.values, dtype=float), state_or_values.p
    return np.asarray(state_or_values, dtype=float), None


def rhs_v(state):
    """``2p / (2p - v_{k+1} + v_{k-1}) - 1``."""
    v, p = _vals(state)
    lo, hi = _nb(v)
    return 2.0 * p * _recip(2.0 * p - hi + lo) - 1.0


def rhs_q(state):
    """``2p (1/q_{k-1} - 1/q_{k+1})``."""
    q, p = _vals(state)
    lo, hi = _nb(q)
    return 2.0 * p * (_recip(lo) - _recip(hi))


def rhs_dkdv(state):
    """``s_k^2 (s_{k+1} - s_{k-1})``."""
    s, _ = _vals(state)
    lo, hi = _nb(s)
    return s * s * (hi - lo)


def rhs_volterra(state):
    """``a_k (a_{k+1} - a_{k-1})``."""
    a, _ = _vals(state)
    lo, hi = _nb(a)
    return a * (hi - lo)


def scaled(rhs, factor):
    """Right-hand side multiplied by a time-scale ``factor``."""

    def wrapped(state):
        return factor * rhs(state)

    wrapped.__name__ = f"{getattr(rhs, '__name__', 'rhs')}_x{factor:g}"
    return wrapped


# -------------------------------------------------------------------- Miura


def miura_s(q_seq, p):
    """``s_k = 2p / q_k``."""
    return 2.0 * p * _recip(np.asarray(q_seq, dtype=float))


def miura_a(s_seq):
    """``a_k = s_k s_{k-1}``; the first entry is ``NaN``."""
    s = np.asarray(s_seq, dtype=float)
    out = np.full(s.shape, np.nan)
    out[1:] = s[1:] * s[:-1]
    return out


def q_from_grid(grid, n_range, m, params):
    """``q_n = 2p - u_{n+2,m} + u_{n,m}`` for ``n`` in ``n_range``."""
    n = np.asarray(n_range)
    u = lambda k: np.array([grid.u(int(x), m) for x in k])  # noqa: E731
    return 2.0 * params.p - u(n + 2) + u(n)


def miura_u_to_a(grid, n_range, m, params):
    """``a_n = 4p^2 / ((2p - u_{n+2} + u_n)(2p - u_{n+1} + u_{n-1}))`` on row m."""
    n = np.asarray(n_range)
    u = lambda k: np.array([grid.u(int(x), m) for x in k])  # noqa: E731
    p = params.p
    den = (2.0 * p - u(n + 2) + u(n)) * (2.0 * p - u(n + 1) + u(n - 1))
    return 4.0 * p * p * _recip(den)


# -------------------------------------------------------------- integration


def integrate_dde(rhs, state, tau_target, steps):
    """Classical four-stage integration to ``tau_target`` on a shrinking window.

    Every stage widens the invalid border by one site, so each step costs four
    sites per side. Returns the surviving interior.
    """
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be positive")
    margin = 4 * steps
    v = np.array(state.values, dtype=float)
    if v.size - 2 * margin < 1:
        raise WindowTooSmall(
            "sequence too short for the integration margin",
            need=2 * margin + 1,
            have=v.size,
        )
    h = (float(tau_target) - state.tau) / steps

    def f(x):
        return rhs(replace(state, values=x))

    with np.errstate(invalid="ignore"):
        for _ in range(steps):
            k1 = f(v)
            k2 = f(v + 0.5 * h * k1)
            k3 = f(v + 0.5 * h * k2)
            k4 = f(v + h * k3)
            v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = v[margin : v.size - margin]
    if not np.all(np.isfinite(out)):
        raise DivergentDenominator("integration produced non-finite values")
    return ContinuumState(out, state.k0 + margin, float(tau_target), state.p)


def s_time_derivative(q_state):
    """``ds/dtau`` for ``s = 2p/q`` when ``q`` follows ``rhs_q``: ``-2p q'/q^2``."""
    q = np.asarray(q_state.values, dtype=float)
    return -2.0 * q_state.p * rhs_q(q_state) / (q * q)


def calibrate_time_scale(q_state):
    """Least-squares factor ``c`` with ``ds/dtau = c * rhs_dkdv(s)``.

    Substituting ``s = 2p/q`` gives exactly ``c = 1/(2p)``, i.e. the discrete
    KdV time is ``tau' = tau / (2p)``; the fit recovers it from data.
    """
    s_state = replace(q_state, values=miura_s(q_state.values, q_state.p))
    lhs = s_time_derivative(q_state)
    rhs = rhs_dkdv(s_state)
    ok = np.isfinite(lhs) & np.isfinite(rhs)
    den = float(np.dot(rhs[ok], rhs[ok]))
    if den == 0.0:
        raise ValueError("data too flat to calibrate the time scale")
    return float(np.dot(lhs[ok], rhs[ok]) / den)


def aligned_difference(a, b):
    """Largest ``|a_k - b_k|`` over sites ``k`` where both states are finite."""
    lo = max(a.k0, b.k0)
    hi = min(a.k0 + a.values.size, b.k0 + b.values.size)
    if hi <= lo:
        raise WindowTooSmall("sequences do not overlap")
    x = a.values[lo - a.k0 : hi - a.k0]
    y = b.values[lo - b.k0 : hi - b.k0]
    ok = np.isfinite(x) & np.isfinite(y)
    return float(np.max(np.abs(x[ok] - y[ok])))


@dataclass(frozen=True)
class MiuraConsistency:
    """Gaps between evolving then mapping and mapping then evolving."""

    time_scale: float
    s_error: float
    a_error: float


def miura_flow_consistency(q_state, tau_target, steps, time_scale=None):
    """Compare the q-flow pushed through ``q -> s -> a`` with the s- and a-flows.

    The s- and a-equations run in the rescaled time; ``time_scale`` defaults to
    the value fitted by :func:`calibrate_time_scale`.
    """
    c = calibrate_time_scale(q_state) if time_scale is None else float(time_scale)
    p = q_state.p
    s0 = ContinuumState(miura_s(q_state.values, p), q_state.k0, q_state.tau, p)
    a0 = ContinuumState(miura_a(s0.values)[1:], q_state.k0 + 1, q_state.tau, p)
    q1 = integrate_dde(rhs_q, q_state, tau_target, steps)
    s1 = integrate_dde(scaled(rhs_dkdv, c), s0, tau_target, steps)
    a1 = integrate_dde(scaled(rhs_volterra, c), a0, tau_target, steps)
    s_from_q = replace(q1, values=miura_s(q1.values, p))
    a_from_q = ContinuumState(miura_a(s_from_q.values)[1:], q1.k0 + 1, q1.tau, p)
    return MiuraConsistency(c, aligned_difference(s_from_q, s1), aligned_difference(a_from_q, a1))


# ------------------------------------------------------------ limit order


def gaussian_profile(k, amplitude=0.1, width=5.0):
    return amplitude * np.exp(-((np.asarray(k, dtype=float) / width) ** 2))


@dataclass(frozen=True)
class ContinuumOrder:
    """Outcome of a continuum-limit study.

    ``status`` is ``"ok"`` or ``"ExactMatch"`` (all errors at round-off level,
    at most ``exact_tol``; the slope is undefined and ``order`` is ``NaN``).
    """

    order: float
    deltas: tuple
    errors: tuple
    status: str = "ok"
    details: dict = field(default_factory=dict)


def lattice_vs_dde_error(p, delta, tau_target, k_lo, k_hi, profile, steps):
    """Max difference between the lattice and the limiting equation at ``tau_target``.

    The lattice starts from ``u(n, 0) = profile(n)`` on ``k_lo <= n <= k_hi``
    with the rightmost column held at the profile's value there, and is
    marched towards decreasing n (the stable orientation).
    """
    params = LatticeParams(p, p - delta)
    rows = int(round(tau_target / delta))
    if abs(rows * delta - tau_target) > 1e-9 * max(1.0, tau_target):
        raise ValueError("tau_target must be a multiple of delta")
    n = np.arange(k_lo, k_hi + 1)
    row = profile(n)
    col = np.full(rows + 1, row[-1])
    grid = evolve(Staircase(k_lo, 0, tuple(row), tuple(col), "lower-right"), params)
    lattice_v = grid.values[:, rows]
    lattice_k = n + rows
    state = ContinuumState(profile(n), k_lo, 0.0, p)
    dde = integrate_dde(rhs_v, state, tau_target, steps)
    ks = dde.k_range
    lo = max(ks[0], lattice_k[0])
    hi = min(ks[-1], lattice_k[-1])
    a = dde.values[lo - ks[0] : hi - ks[0] + 1]
    b = lattice_v[lo - lattice_k[0] : hi - lattice_k[0] + 1]
    return float(np.max(np.abs(a - b)))


def continuum_limit_order(
    p=2.0,
    deltas=(0.1, 0.05, 0.025),
    tau_target=1.0,
    k_window=(-250, 250),
    profile=gaussian_profile,
    steps=40,
    exact_tol=1e-13,
):
    """Fit the slope of ``log(error)`` against ``log(delta)``."""
    deltas = tuple(float(d) for d in deltas)
    if len(deltas) < 2 or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing with at least two entries")
    errors = tuple(
        lattice_vs_dde_error(p, d, tau_target, k_window[0], k_window[1], profile, steps)
        for d in deltas
    )
    if all(e <= exact_tol for e in errors):
        return ContinuumOrder(float("nan"), deltas, errors, "ExactMatch")
    if any(e <= exact_tol for e in errors):
        raise ValueError("some but not all errors are at round-off level; slope undefined")
    slope = float(np.polyfit(np.log(deltas), np.log(errors), 1)[0])
    return ContinuumOrder(slope, deltas, errors, "ok")


# --------------------------------------------------------------------- I/O

_HEADER = re.compile(r"#\s*k0=(?P<k0>-?\d+)\s+tau=(?P<tau>\S+)\s+p=(?P<p>\S+)\s*$")


def state_to_csv(state):
    buf = io.StringIO()
    buf.write(f"# k0={state.k0} tau={state.tau!r} p={state.p!r}\n")
    for v in state.values:
        buf.write(format(v, ".17g") + "\n")
    return buf.getvalue()


def state_from_csv(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    match = _HEADER.match(lines[0]) if lines else None
    if match is None:
        raise ValueError("malformed sequence header")
    vals = [float(ln) for ln in lines[1:]]
    return ContinuumState(np.array(vals), int(match["k0"]), float(match["tau"]), float(match["p"]))

