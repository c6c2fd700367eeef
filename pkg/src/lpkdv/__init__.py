"""Numerical toolkit for the lattice potential KdV equation.

Submodules: :mod:`lpkdv.lattice` (grids, residual, evolution),
:mod:`lpkdv.soliton`, :mod:`lpkdv.point_symmetry`, :mod:`lpkdv.gen_symmetry`,
:mod:`lpkdv.spectral`, :mod:`lpkdv.continuum`, :mod:`lpkdv.painleve`,
:mod:`lpkdv.verify` and :mod:`lpkdv.cli`.

Set ``LPKDV_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
"""

from ._kernels import backend
from .errors import LpkdvError
from .lattice import Grid, LatticeParams, Staircase, evolve, residual, residual_max
from .soliton import SolitonMode, SolitonSpec, soliton_grid

__version__ = "0.1.0"
