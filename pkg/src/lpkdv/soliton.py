"""Reflectionless one- and two-soliton solutions and derived potentials.

The complex spectral data are placed on the imaginary axis, eigenvalue
``i*kappa0`` and norming constant ``i*c0`` with ``kappa0, c0 > 0``. The
plane-wave factors then become the real bases

    X = (p + kappa0) / (p - kappa0),    Y = (q + kappa0) / (q - kappa0),

and the soliton ``u = c0 E / (1 + c0 E / (2 kappa0))`` with ``E = X^n Y^m``
rises monotonically from 0 to ``2 kappa0``. Exponentials are handled in log
space so that windows far from the core neither overflow nor lose the limits.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import Degenerate, InvalidSpec, OutOfWindow
from .lattice import Grid


@dataclass(frozen=True)
class SolitonMode:
    kappa0: float
    c0: float


@dataclass(frozen=True)
class SolitonSpec:
    """Spectral data for an N = 1 or N = 2 reflectionless solution."""

    modes: tuple

    def __post_init__(self):
        modes = tuple(
            m if isinstance(m, SolitonMode) else SolitonMode(float(m[0]), float(m[1]))
            for m in self.modes
        )
        object.__setattr__(self, "modes", modes)
        if len(modes) not in (1, 2):
            raise InvalidSpec("only one or two modes are supported", n_modes=len(modes))
        for mode in modes:
            if not (mode.kappa0 > 0.0) or not np.isfinite(mode.kappa0):
                raise InvalidSpec("kappa0 must be positive", kappa0=mode.kappa0)
            if not (mode.c0 >= 0.0) or not np.isfinite(mode.c0):
                raise InvalidSpec("c0 must be non-negative", c0=mode.c0)
        if len(modes) == 2 and modes[0].kappa0 == modes[1].kappa0:
            raise Degenerate("the two kappa0 values coincide", kappa0=modes[0].kappa0)

    @classmethod
    def single(cls, kappa0, c0):
        return cls(((kappa0, c0),))

    def to_json(self):
        return json.dumps(
            {"modes": [{"kappa0": m.kappa0, "c0": m.c0} for m in self.modes]},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        try:
            return cls(tuple((m["kappa0"], m["c0"]) for m in data["modes"]))
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"malformed soliton spec: {exc}") from exc


def _check_mode(mode, params):
    bound = min(abs(params.p), abs(params.q))
    if not mode.kappa0 < bound:
        raise InvalidSpec("kappa0 must be below min(|p|, |q|)", kappa0=mode.kappa0)


def log_bases(kappa0, params):
    """``(log X, log Y)`` for one eigenvalue."""
    p, q = params.p, params.q
    return np.log((p + kappa0) / (p - kappa0)), np.log((q + kappa0) / (q - kappa0))


def _log_e(mode, n, m, params):
    """``log(c0 X^n Y^m)``; ``-inf`` when ``c0 = 0``."""
    lx, ly = log_bases(mode.kappa0, params)
    with np.errstate(divide="ignore"):
        lc = np.log(mode.c0)
    return lc + np.asarray(n, dtype=float) * lx + np.asarray(m, dtype=float) * ly


def _logistic(t):
    """``1 / (1 + exp(-t))`` without overflow."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def one_soliton(n, m, spec, params):
    """Single soliton at ``(n, m)``; vectorised over integer arrays."""
    if len(spec.modes) != 1:
        raise InvalidSpec("one_soliton needs exactly one mode")
    mode = spec.modes[0]
    _check_mode(mode, params)
    k = mode.kappa0
    t = _log_e(mode, n, m, params) - np.log(2.0 * k)
    val = 2.0 * k * _logistic(np.atleast_1d(t)).reshape(np.shape(t))
    return _scalar_or_array(val, n if np.ndim(n) else m)


def _two_terms(spec, n, m, params):
    """Log-space pieces of the two-soliton solution, scaled by a common factor."""
    m1, m2 = spec.modes
    _check_mode(m1, params)
    _check_mode(m2, params)
    k1, k2 = m1.kappa0, m2.kappa0
    l1 = np.atleast_1d(_log_e(m1, n, m, params))
    l2 = np.atleast_1d(_log_e(m2, n, m, params))
    l1, l2 = np.broadcast_arrays(l1, l2)
    # Divide numerator and denominator by max(1, E1, E2, E1 E2).
    scale = np.maximum.reduce([np.zeros_like(l1), l1, l2, l1 + l2])
    e0 = np.exp(-scale)
    e1 = np.exp(l1 - scale)
    e2 = np.exp(l2 - scale)
    e12 = np.exp(l1 + l2 - scale)
    s = k1 + k2
    g = (k2 - k1) ** 2 / (4.0 * k1 * k2 * s * s)
    den = e0 + e1 / (2.0 * k1) + e2 / (2.0 * k2) + g * e12
    a = (k1 - k2) / (2.0 * k2 * s)
    b = (k2 - k1) / (2.0 * k1 * s)
    return e0, e1, e2, e12, den, a, b


def two_soliton(n, m, spec, params):
    """Two-soliton solution built from the 2x2 Cauchy-matrix determinant.

    ``u = (E1 + E2 + (a + b) E1 E2) / D`` with ``E_j = c_j X_j^n Y_j^m``,
    ``D = 1 + E1/(2k1) + E2/(2k2) + E1 E2 (k2-k1)^2 / (4 k1 k2 (k1+k2)^2)``,
    ``a = (k1-k2)/(2 k2 (k1+k2))`` and ``b = (k2-k1)/(2 k1 (k1+k2))``.
    """
    if len(spec.modes) != 2:
        raise InvalidSpec("two_soliton needs exactly two modes")
    e0, e1, e2, e12, den, a, b = _two_terms(spec, n, m, params)
    val = ((e1 + e2 + (a + b) * e12) / den).reshape(np.broadcast(n, m).shape)
    return _scalar_or_array(val, n if np.ndim(n) else m)


def soliton(n, m, spec, params):
    """Dispatch on the number of modes."""
    if len(spec.modes) == 1:
        return one_soliton(n, m, spec, params)
    return two_soliton(n, m, spec, params)


def soliton_grid(spec, params, n0, m0, n_cols, m_rows):
    """Sample the soliton of ``spec`` on a window."""
    return Grid.from_function(
        lambda nn, mm: soliton(nn, mm, spec, params), n0, m0, n_cols, m_rows
    )


def centered_window(spec, params, n_cols, m_rows):
    """Origin ``(n0, m0)`` of a window centred on the core of the first mode.

    The core is where ``c0 X^n Y^m / (2 kappa0) = 1``; along ``m = 0`` this is
    ``n = log(2 kappa0 / c0) / log X``.
    """
    mode = spec.modes[0]
    lx, ly = log_bases(mode.kappa0, params)
    mc = 0
    nc = np.log(2.0 * mode.kappa0 / mode.c0) / lx if mode.c0 > 0 else 0.0
    return int(round(nc)) - n_cols // 2, mc - m_rows // 2


class PotentialView:
    """Read-only accessors for the potentials derived from a field grid.

    ``eta = u(n,m) - u(n+2,m)``, ``q_pot = 2p + eta`` and
    ``p_pot = 2q - u(n,m+2) + u(n,m)``.
    """

    def __init__(self, grid, params):
        self.grid = grid
        self.params = params

    def _get(self, n, m):
        if not self.grid.contains(n, m):
            raise OutOfWindow("potential stencil leaves the grid", n=n, m=m)
        return self.grid.u(n, m)

    def eta(self, n, m):
        return self._get(n, m) - self._get(n + 2, m)

    def q_pot(self, n, m):
        return 2.0 * self.params.p + self.eta(n, m)

    def p_pot(self, n, m):
        return 2.0 * self.params.q - self._get(n, m + 2) + self._get(n, m)

    def eta_array(self):
        """``eta`` on columns ``n0 .. n0+N-3``, shape ``(N-2, M)``."""
        v = self.grid.values
        return v[:-2, :] - v[2:, :]

    def q_array(self):
        return 2.0 * self.params.p + self.eta_array()

    def p_array(self):
        """``p_pot`` on rows ``m0 .. m0+M-3``, shape ``(N, M-2)``."""
        v = self.grid.values
        return 2.0 * self.params.q - v[:, 2:] + v[:, :-2]


def eta(view, n, m):
    return view.eta(n, m)


def q_pot(view, n, m):
    return view.q_pot(n, m)


def p_pot(view, n, m):
    return view.p_pot(n, m)
