"""Hot loops of the lattice code, in two interchangeable implementations.

Each kernel exists as a plain loop compiled with ``numba.njit`` and as a
vectorised numpy version that sweeps anti-diagonals. Both visit cells in the
same order, so they produce identical values and report the same singular
cell. The numba path is used when numba imports and the environment variable
``LPKDV_DISABLE_NUMBA`` is unset or ``0``.

Grid arrays are indexed ``u[i, j]`` with ``i`` along n and ``j`` along m.
Corner fills return ``(-1, -1)`` on success, otherwise the local lower-left
index of the first quad whose denominator fell below the singularity
tolerance. The array is left partially filled in that case.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_flag = os.environ.get("LPKDV_DISABLE_NUMBA", "0").strip().lower()
USE_NUMBA = numba is not None and _flag in ("", "0", "false", "no")

SING_REL = 1e-12


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------- loop forms


def _fill_lower_left_loop(u, p, q):
    # Unknown u[i+1, j+1] from the quad (i, j); sweep diagonals s = i + j.
    N, M = u.shape
    pq2 = p * p - q * q
    for s in range(0, N + M - 3):
        ilo = max(0, s - (M - 2))
        ihi = min(N - 2, s)
        for i in range(ilo, ihi + 1):
            j = s - i
            u00 = u[i, j]
            u10 = u[i + 1, j]
            u01 = u[i, j + 1]
            den = p - q + u01 - u10
            if abs(den) <= SING_REL * (1.0 + abs(p - q) + abs(u01) + abs(u10)):
                return i, j
            u[i + 1, j + 1] = u00 + (p + q) - pq2 / den
    return -1, -1


def _fill_lower_right_loop(u, p, q):
    # Unknown u[i, j+1] from the quad (i, j); sweep s = (N-2-i) + j.
    N, M = u.shape
    pq2 = p * p - q * q
    for s in range(0, N + M - 3):
        jlo = max(0, s - (N - 2))
        jhi = min(M - 2, s)
        for j in range(jlo, jhi + 1):
            i = N - 2 - (s - j)
            u00 = u[i, j]
            u10 = u[i + 1, j]
            u11 = u[i + 1, j + 1]
            den = p + q - u11 + u00
            if abs(den) <= SING_REL * (1.0 + abs(p + q) + abs(u11) + abs(u00)):
                return i, j
            u[i, j + 1] = u10 - (p - q) + pq2 / den
    return -1, -1


def _fill_reduced_lower_right_loop(u, delta):
    # Reduced equation (u10 - u01)(u11 - u00) = delta, unknown u01.
    N, M = u.shape
    for s in range(0, N + M - 3):
        jlo = max(0, s - (N - 2))
        jhi = min(M - 2, s)
        for j in range(jlo, jhi + 1):
            i = N - 2 - (s - j)
            u00 = u[i, j]
            u11 = u[i + 1, j + 1]
            den = u11 - u00
            if abs(den) <= SING_REL * (1.0 + abs(u11) + abs(u00)):
                return i, j
            u[i, j + 1] = u[i + 1, j] - delta / den
    return -1, -1


def _residual_field_loop(u, p, q):
    N, M = u.shape
    out = np.empty((N - 1, M - 1))
    pq2 = p * p - q * q
    for i in range(N - 1):
        for j in range(M - 1):
            out[i, j] = (p - q + u[i, j + 1] - u[i + 1, j]) * (
                p + q - u[i + 1, j + 1] + u[i, j]
            ) - pq2
    return out


# ------------------------------------------------------------- numpy forms


def _first_bad(bad, ii, jj):
    k = int(np.argmax(bad))
    return int(ii[k]), int(jj[k])


def _fill_lower_left_numpy(u, p, q):
    N, M = u.shape
    pq2 = p * p - q * q
    for s in range(0, N + M - 3):
        ii = np.arange(max(0, s - (M - 2)), min(N - 2, s) + 1)
        jj = s - ii
        u10 = u[ii + 1, jj]
        u01 = u[ii, jj + 1]
        den = p - q + u01 - u10
        bad = np.abs(den) <= SING_REL * (1.0 + abs(p - q) + np.abs(u01) + np.abs(u10))
        if bad.any():
            return _first_bad(bad, ii, jj)
        u[ii + 1, jj + 1] = u[ii, jj] + (p + q) - pq2 / den
    return -1, -1


def _fill_lower_right_numpy(u, p, q):
    N, M = u.shape
    pq2 = p * p - q * q
    for s in range(0, N + M - 3):
        jj = np.arange(max(0, s - (N - 2)), min(M - 2, s) + 1)
        ii = N - 2 - (s - jj)
        u00 = u[ii, jj]
        u11 = u[ii + 1, jj + 1]
        den = p + q - u11 + u00
        bad = np.abs(den) <= SING_REL * (1.0 + abs(p + q) + np.abs(u11) + np.abs(u00))
        if bad.any():
            return _first_bad(bad, ii, jj)
        u[ii, jj + 1] = u[ii + 1, jj] - (p - q) + pq2 / den
    return -1, -1


def _fill_reduced_lower_right_numpy(u, delta):
    N, M = u.shape
    for s in range(0, N + M - 3):
        jj = np.arange(max(0, s - (N - 2)), min(M - 2, s) + 1)
        ii = N - 2 - (s - jj)
        u00 = u[ii, jj]
        u11 = u[ii + 1, jj + 1]
        den = u11 - u00
        bad = np.abs(den) <= SING_REL * (1.0 + np.abs(u11) + np.abs(u00))
        if bad.any():
            return _first_bad(bad, ii, jj)
        u[ii, jj + 1] = u[ii + 1, jj] - delta / den
    return -1, -1


def _residual_field_numpy(u, p, q):
    return (p - q + u[:-1, 1:] - u[1:, :-1]) * (p + q - u[1:, 1:] + u[:-1, :-1]) - (
        p * p - q * q
    )


NUMPY_KERNELS = {
    "fill_lower_left": _fill_lower_left_numpy,
    "fill_lower_right": _fill_lower_right_numpy,
    "fill_reduced_lower_right": _fill_reduced_lower_right_numpy,
    "residual_field": _residual_field_numpy,
}

if numba is not None:
    _jit = numba.njit(cache=True)
    NUMBA_KERNELS = {
        "fill_lower_left": _jit(_fill_lower_left_loop),
        "fill_lower_right": _jit(_fill_lower_right_loop),
        "fill_reduced_lower_right": _jit(_fill_reduced_lower_right_loop),
        "residual_field": _jit(_residual_field_loop),
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def kernel(name):
    """Return the active implementation of kernel ``name``."""
    return _ACTIVE[name]


def fill_lower_left(u, p, q):
    return _ACTIVE["fill_lower_left"](u, float(p), float(q))


def fill_lower_right(u, p, q):
    return _ACTIVE["fill_lower_right"](u, float(p), float(q))


def fill_reduced_lower_right(u, delta):
    return _ACTIVE["fill_reduced_lower_right"](u, float(delta))


def residual_field(u, p, q):
    return _ACTIVE["residual_field"](np.ascontiguousarray(u, dtype=float), float(p), float(q))
