"""Lattice field data model and the lpKdV quad equation.

The quad equation relates the four corners of an elementary square,

    D = (p - q + u01 - u10)(p + q - u11 + u00) - (p^2 - q^2) = 0,

with ``u00 = u(n, m)``, ``u10 = u(n+1, m)``, ``u01 = u(n, m+1)`` and
``u11 = u(n+1, m+1)``.

Grids store ``values[i, j] = u(n0 + i, m0 + j)``; the first axis runs along n.
"""

import io
import re
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidParams, OutOfWindow, SingularQuad

SING_REL = _kernels.SING_REL


@dataclass(frozen=True)
class LatticeParams:
    """Lattice parameters ``p`` (n-direction) and ``q`` (m-direction).

    ``p = q`` or ``p = -q`` is rejected unless ``degenerate_ok`` is set; only
    the factorisation check at ``p = q`` needs it.
    """

    p: float
    q: float
    degenerate_ok: bool = field(default=False, compare=False)

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if not (np.isfinite(p) and np.isfinite(q)):
            raise InvalidParams("p and q must be finite", p=p, q=q)
        if p == 0.0 or q == 0.0:
            raise InvalidParams("p and q must be nonzero", p=p, q=q)
        if not self.degenerate_ok and (p == q or p == -q):
            raise InvalidParams("p must differ from q and -q", p=p, q=q)

    def swapped(self):
        return LatticeParams(self.q, self.p, self.degenerate_ok)


@dataclass(frozen=True)
class Cell:
    """Lower-left corner ``(n, m)`` of an elementary quad."""

    n: int
    m: int


class Grid:
    """Immutable rectangular window of field values with an absolute origin."""

    __slots__ = ("n0", "m0", "values")

    def __init__(self, n0, m0, values, allow_nonfinite=False):
        arr = np.array(values, dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("grid values must be a nonempty 2-D array")
        if not allow_nonfinite and not np.all(np.isfinite(arr)):
            raise ValueError("grid values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "n0", int(n0))
        object.__setattr__(self, "m0", int(m0))
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Grid is immutable")

    def __repr__(self):
        return f"Grid(n0={self.n0}, m0={self.m0}, shape={self.values.shape})"

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.n0 == other.n0
            and self.m0 == other.m0
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    __hash__ = None

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_cols(self):
        return self.values.shape[0]

    @property
    def m_rows(self):
        return self.values.shape[1]

    @property
    def n_range(self):
        return np.arange(self.n0, self.n0 + self.n_cols)

    @property
    def m_range(self):
        return np.arange(self.m0, self.m0 + self.m_rows)

    def index_arrays(self):
        """Absolute ``(n, m)`` arrays with the same shape as ``values``."""
        return np.meshgrid(self.n_range, self.m_range, indexing="ij")

    def contains(self, n, m):
        return (
            self.n0 <= n < self.n0 + self.n_cols and self.m0 <= m < self.m0 + self.m_rows
        )

    def u(self, n, m):
        if not self.contains(n, m):
            raise OutOfWindow("point outside grid", n=n, m=m)
        return float(self.values[n - self.n0, m - self.m0])

    def window(self, n0, m0, n_cols, m_rows):
        """Sub-grid with absolute origin ``(n0, m0)``."""
        i0, j0 = n0 - self.n0, m0 - self.m0
        if i0 < 0 or j0 < 0 or i0 + n_cols > self.n_cols or j0 + m_rows > self.m_rows:
            raise OutOfWindow("sub-window outside grid", n=n0, m=m0)
        return Grid(n0, m0, self.values[i0 : i0 + n_cols, j0 : j0 + m_rows])

    def with_values(self, values):
        return Grid(self.n0, self.m0, values)

    @classmethod
    def from_function(cls, func, n0, m0, n_cols, m_rows):
        """Sample ``func(n, m)`` (vectorised over index arrays) on a window."""
        nn, mm = np.meshgrid(
            np.arange(n0, n0 + n_cols), np.arange(m0, m0 + m_rows), indexing="ij"
        )
        return cls(n0, m0, np.broadcast_to(func(nn, mm), nn.shape))


@dataclass(frozen=True)
class Staircase:
    """Cauchy data for the quad equation on one row and one column.

    ``row`` holds ``u(n0 + i, m0)``. With ``corner="lower-left"`` ``col`` holds
    ``u(n0, m0 + j)`` and evolution fills ``n > n0, m > m0``. With
    ``corner="lower-right"`` ``col`` holds ``u(n0 + len(row) - 1, m0 + j)`` and
    evolution marches towards decreasing n. The two legs share the corner.
    """

    n0: int
    m0: int
    row: tuple
    col: tuple
    corner: str = "lower-left"

    def __post_init__(self):
        row = tuple(float(v) for v in self.row)
        col = tuple(float(v) for v in self.col)
        object.__setattr__(self, "row", row)
        object.__setattr__(self, "col", col)
        if not row or not col:
            raise ValueError("staircase legs must be nonempty")
        if self.corner not in ("lower-left", "lower-right"):
            raise ValueError(f"unknown staircase corner {self.corner!r}")
        shared = row[0] if self.corner == "lower-left" else row[-1]
        if shared != col[0]:
            raise ValueError("staircase legs disagree at the shared corner")
        if not (np.all(np.isfinite(row)) and np.all(np.isfinite(col))):
            raise ValueError("staircase values must be finite")

    @classmethod
    def from_grid(cls, grid, corner="lower-left"):
        v = grid.values
        col = v[0, :] if corner == "lower-left" else v[-1, :]
        return cls(grid.n0, grid.m0, tuple(v[:, 0]), tuple(col), corner)


def residual(u00, u10, u01, u11, params):
    """Value of the quad expression; zero on solutions."""
    p, q = params.p, params.q
    return (p - q + u01 - u10) * (p + q - u11 + u00) - (p * p - q * q)


def residual_gradient(u00, u10, u01, u11, params):
    """Partial derivatives ``(d00, d10, d01, d11)`` of the quad expression."""
    p, q = params.p, params.q
    a = p - q + u01 - u10
    b = p + q - u11 + u00
    return a, -b, b, -a


def factored_degenerate(u00, u10, u01, u11, p):
    """Product of the two discrete wave operators the equation splits into at p = q.

    Equals ``-residual`` when ``q = p``, so both vanish on the same set.
    """
    return (u00 - u11 + 2.0 * p) * (u10 - u01)


def _sing_tol(p, q, u01, u10):
    return SING_REL * (1.0 + abs(p - q) + abs(u01) + abs(u10))


def _corner(u00, u10, u01, p, q, cell=None):
    den = p - q + u01 - u10
    if abs(den) <= _sing_tol(p, q, u01, u10):
        raise SingularQuad("vanishing denominator in corner solve", cell=cell)
    return u00 + (p + q) - (p * p - q * q) / den


def solve_corner(u00, u10, u01, params, cell=None):
    """Solve the quad equation for ``u11``."""
    return _corner(float(u00), float(u10), float(u01), params.p, params.q, cell)


def evolve(staircase, params):
    """Fill the quadrant determined by ``staircase`` with the corner solve.

    The lower-left orientation amplifies round-off roughly by ``(p+q)/(p-q)``
    per diagonal for ``|p| > |q| > 0``; the lower-right orientation solves for
    ``u01`` instead and stays at round-off level on the same data.
    """
    n_cols, m_rows = len(staircase.row), len(staircase.col)
    u = np.full((n_cols, m_rows), np.nan)
    u[:, 0] = staircase.row
    if staircase.corner == "lower-left":
        u[0, :] = staircase.col
        status = _kernels.fill_lower_left(u, params.p, params.q)
    else:
        u[-1, :] = staircase.col
        status = _kernels.fill_lower_right(u, params.p, params.q)
    i, j = int(status[0]), int(status[1])
    if i >= 0:
        cell = (staircase.n0 + i, staircase.m0 + j)
        raise SingularQuad("vanishing denominator during evolution", cell=cell)
    if not np.all(np.isfinite(u)):
        raise SingularQuad("evolution overflowed to non-finite values")
    return Grid(staircase.n0, staircase.m0, u)


def residual_field(grid, params):
    """Array of quad residuals, shape ``(N-1, M-1)``, indexed by lower-left corner."""
    return _kernels.residual_field(grid.values, params.p, params.q)


def residual_max(grid, params):
    """Largest absolute quad residual over the grid."""
    if grid.n_cols < 2 or grid.m_rows < 2:
        raise ValueError("grid must be at least 2x2")
    return float(np.max(np.abs(residual_field(grid, params))))


def cube_top_values(u, u1, u2, u3, p, q, r, u23_shift=0.0):
    """The opposite cube vertex computed from the three faces that meet there.

    ``u23_shift`` is added to the intermediate ``u23`` value and exists to
    probe the detector with a deliberately inconsistent cube.
    """
    u12 = _corner(u, u1, u2, p, q)
    u13 = _corner(u, u1, u3, p, r)
    u23 = _corner(u, u2, u3, q, r) + u23_shift
    via3 = _corner(u3, u13, u23, p, q)
    via2 = _corner(u2, u12, u23, p, r)
    via1 = _corner(u1, u12, u13, q, r)
    return via1, via2, via3


def check_3d_consistency(u, u1, u2, u3, p, q, r):
    """Largest pairwise disagreement between the three ways to reach ``u123``.

    The cube is evaluated in ``np.longdouble``: when the top face is close to
    singular ``u123`` becomes large and double-precision round-off in the
    intermediate vertices alone exceeds ``1e-10``.
    """
    ext = [np.longdouble(x) for x in (u, u1, u2, u3, p, q, r)]
    a, b, c = cube_top_values(*ext)
    return float(max(abs(a - b), abs(a - c), abs(b - c)))


# ------------------------------------------------------------------ CSV I/O

_HEADER = re.compile(
    r"#\s*n0=(?P<n0>-?\d+)\s+m0=(?P<m0>-?\d+)\s+p=(?P<p>\S+)\s+q=(?P<q>\S+)\s*$"
)


def grid_to_csv(grid, params):
    """Serialise a grid; one line per row of constant m, starting at ``m0``."""
    buf = io.StringIO()
    buf.write(f"# n0={grid.n0} m0={grid.m0} p={params.p!r} q={params.q!r}\n")
    for j in range(grid.m_rows):
        buf.write(",".join(format(v, ".17g") for v in grid.values[:, j]))
        buf.write("\n")
    return buf.getvalue()


def grid_from_csv(text, allow_nonfinite=False):
    """Parse :func:`grid_to_csv` output into ``(grid, params)``.

    ``allow_nonfinite`` admits ``nan`` entries, used for staircase files
    where only one row and one column are given.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty grid file")
    match = _HEADER.match(lines[0])
    if match is None:
        raise ValueError(f"malformed grid header: {lines[0]!r}")
    rows = [[float(tok) for tok in ln.split(",")] for ln in lines[1:]]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("grid rows must be nonempty and of equal length")
    params = LatticeParams(float(match["p"]), float(match["q"]), degenerate_ok=True)
    grid = Grid(int(match["n0"]), int(match["m0"]), np.array(rows).T, allow_nonfinite)
    return grid, params


def write_grid_csv(path, grid, params):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(grid_to_csv(grid, params))


def read_grid_csv(path, allow_nonfinite=False):
    with open(path, encoding="utf-8") as fh:
        return grid_from_csv(fh.read(), allow_nonfinite)
