"""Lax pair, scalar spectral recursions and reflectionless spectral data.

The Lax matrices at a site are

    L = [[p - u10, 1], [h2 - p^2 + (p + u00)(p - u10), p + u00]]
    M = [[q - u01, 1], [h2 - q^2 + (q + u00)(q - u01), q + u00]]

with ``h2`` the squared spectral parameter; ``det L = p^2 - h2`` and
``det M = q^2 - h2``. Their compatibility ``L(n,m+1) M(n,m) = M(n+1,m) L(n,m)``
holds on solutions of the quad equation.

Reflectionless data use the same imaginary-axis realisation as
:mod:`lpkdv.soliton`: eigenvalue ``i kappa0``, norming constant ``i c0``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec, OutOfWindow, PoleAtQ
from .soliton import _check_mode, log_bases

PSI_RESCALE = 1e12


@dataclass(frozen=True)
class LaxPair:
    L: np.ndarray
    M: np.ndarray
    h2: float


def _lax_arrays(u00, u10, u01, p, q, h2):
    """Entry arrays of L and M, each shaped ``(2, 2) + u00.shape``."""
    one = np.ones_like(u00)
    L = np.array([
        [p - u10, one],
        [h2 - p * p + (p + u00) * (p - u10), p + u00],
    ])
    M = np.array([
        [q - u01, one],
        [h2 - q * q + (q + u00) * (q - u01), q + u00],
    ])
    return L, M


def lax_matrices(n, m, grid, params, h2):
    """Lax matrices at site ``(n, m)``."""
    for nn, mm in ((n, m), (n + 1, m), (n, m + 1)):
        if not grid.contains(nn, mm):
            raise OutOfWindow("Lax stencil leaves the grid", n=n, m=m)
    L, M = _lax_arrays(
        np.float64(grid.u(n, m)), grid.u(n + 1, m), grid.u(n, m + 1), params.p, params.q, h2
    )
    return LaxPair(L.astype(float), M.astype(float), float(h2))


def _matmul(A, B):
    return np.einsum("ik...,kj...->ij...", A, B)


def lax_compatibility_defect(grid, params, h2, region=None):
    """Largest entry of ``L(n,m+1) M(n,m) - M(n+1,m) L(n,m)`` over quads.

    ``region`` is ``(n_lo, m_lo, n_hi, m_hi)`` with inclusive lower-left quad
    corners; default is every quad of the grid.
    """
    v = np.asarray(grid.values)
    if region is None:
        region = (grid.n0, grid.m0, grid.n0 + grid.n_cols - 2, grid.m0 + grid.m_rows - 2)
    n_lo, m_lo, n_hi, m_hi = region
    i0, j0, i1, j1 = n_lo - grid.n0, m_lo - grid.m0, n_hi - grid.n0, m_hi - grid.m0
    if i0 < 0 or j0 < 0 or i1 + 1 >= grid.n_cols or j1 + 1 >= grid.m_rows or i1 < i0 or j1 < j0:
        raise OutOfWindow("region quads leave the grid", n=n_lo, m=m_lo)
    s = np.s_[i0 : i1 + 1, j0 : j1 + 1]
    s10 = np.s_[i0 + 1 : i1 + 2, j0 : j1 + 1]
    s01 = np.s_[i0 : i1 + 1, j0 + 1 : j1 + 2]
    s11 = np.s_[i0 + 1 : i1 + 2, j0 + 1 : j1 + 2]
    p, q = params.p, params.q
    L00, M00 = _lax_arrays(v[s], v[s10], v[s01], p, q, h2)
    L01, _ = _lax_arrays(v[s01], v[s11], v[s01], p, q, h2)
    _, M10 = _lax_arrays(v[s10], v[s10], v[s11], p, q, h2)
    diff = _matmul(L01, M00) - _matmul(M10, L00)
    return float(np.max(np.abs(diff)))


def scalar_recursion_check(grid, params, h2, psi_seed):
    """Propagate the scalar wave function and test the second m-recursion.

    Row ``m0`` is filled from ``psi_seed = (psi(n0, m0), psi(n0+1, m0))`` by
    ``psi(n+2) = (2p - u(n+2) + u(n)) psi(n+1) + (h2 - p^2) psi(n)``. Each
    further row follows from
    ``psi(n, m+1) = psi(n+1, m) + (q - p + u(n+1, m) - u(n, m+1)) psi(n, m)``
    on a triangle that loses one column per row. The result is the largest
    violation of ``psi(n, m+2) = (2q - u(n,m+2) + u(n,m)) psi(n,m+1) +
    (h2 - q^2) psi(n,m)`` divided by the magnitude of its terms.

    Values are stored as ``a[n, m] * exp(s[n] + r[m])``: the column scales
    ``s`` absorb growth along n and the row scales ``r`` growth along m, and a
    rescale happens whenever a mantissa exceeds ``1e12``.
    """
    v = np.asarray(grid.values)
    N, M = v.shape
    if N < 3 or M < 3:
        raise OutOfWindow("grid too small for the scalar recursions")
    p, q = params.p, params.q
    a = np.full((N, M), np.nan)
    s = np.zeros(N)
    r = np.zeros(M)
    a[0, 0], a[1, 0] = float(psi_seed[0]), float(psi_seed[1])
    for i in range(N - 2):
        nxt = (2 * p - v[i + 2, 0] + v[i, 0]) * a[i + 1, 0] + (h2 - p * p) * a[i, 0] * np.exp(
            s[i] - s[i + 1]
        )
        s[i + 2] = s[i + 1]
        if abs(nxt) > PSI_RESCALE:
            s[i + 2] += np.log(abs(nxt))
            nxt = nxt / abs(nxt)
        a[i + 2, 0] = nxt
    for j in range(M - 1):
        k = N - 1 - j
        if k < 1:
            break
        ratio = np.exp(s[1 : k + 1] - s[:k])
        row = a[1 : k + 1, j] * ratio + (q - p + v[1 : k + 1, j] - v[:k, j + 1]) * a[:k, j]
        big = np.max(np.abs(row))
        r[j + 1] = r[j]
        if big > PSI_RESCALE:
            r[j + 1] += np.log(big)
            row = row / big
        a[:k, j + 1] = row
    worst = 0.0
    for j in range(M - 2):
        k = N - 2 - j
        if k < 1:
            break
        e1 = np.exp(r[j + 1] - r[j + 2])
        e0 = np.exp(r[j] - r[j + 2])
        lhs = a[:k, j + 2]
        t1 = (2 * q - v[:k, j + 2] + v[:k, j]) * a[:k, j + 1] * e1
        t0 = (h2 - q * q) * a[:k, j] * e0
        scale = np.abs(lhs) + np.abs(t1) + np.abs(t0)
        scale = np.where(scale > 0, scale, 1.0)
        worst = max(worst, float(np.max(np.abs(lhs - t1 - t0) / scale)))
    return worst


# ------------------------------------------------------------ reflectionless


def reflection_evolution_factor(kappa0, params):
    """Per-step factor of the reflection coefficient at eigenvalue ``i kappa0``.

    ``(q - i kappa)/(q + i kappa)`` at ``kappa = i kappa0`` is
    ``(q + kappa0)/(q - kappa0)``.
    """
    q = params.q
    if abs(q - kappa0) <= 1e-14 * (1.0 + abs(q)):
        raise PoleAtQ("kappa0 coincides with q", kappa0=kappa0, q=q)
    return (q + kappa0) / (q - kappa0)


def norming_constants(spec, m, params):
    """``C_{j,m} = c0_j * factor_j^m`` (real parameterisation)."""
    return tuple(
        mode.c0 * reflection_evolution_factor(mode.kappa0, params) ** m for mode in spec.modes
    )


def _log_terms(kappas, log_cs, n, params):
    """Scaled ``E_j = C_j X_j^n`` in log space; returns the log exponents."""
    out = []
    for k, lc in zip(kappas, log_cs):
        lx, _ = log_bases(k, params)
        out.append(lc + np.asarray(n, dtype=float) * lx)
    return out


def _jost_scaled(kappas, log_cs, n, params):
    """Scaled Jost values and ``E_j mu_j`` products.

    Returns ``(mu, e_mu, D_log)``: lists of ``mu_j`` and ``E_j mu_j`` arrays and
    ``log D``. Everything is divided by ``max(1, E1, E2, E1 E2)`` before use.
    """
    if len(kappas) == 1:
        (k,) = kappas
        (l1,) = _log_terms(kappas, log_cs, n, params)
        l1 = np.atleast_1d(l1)
        t = l1 - np.log(2.0 * k)
        sc = np.maximum(0.0, t)
        den = np.exp(-sc) + np.exp(t - sc)
        mu = np.exp(-sc) / den
        e_mu = np.exp(l1 - sc) / den
        return [mu], [e_mu], sc + np.log(den)
    k1, k2 = kappas
    l1, l2 = (np.atleast_1d(x) for x in _log_terms(kappas, log_cs, n, params))
    l1, l2 = np.broadcast_arrays(l1, l2)
    sc = np.maximum.reduce([np.zeros_like(l1), l1, l2, l1 + l2])
    e0, e1, e2, e12 = (np.exp(x - sc) for x in (np.zeros_like(l1), l1, l2, l1 + l2))
    s = k1 + k2
    den = e0 + e1 / (2 * k1) + e2 / (2 * k2) + (k2 - k1) ** 2 / (4 * k1 * k2 * s * s) * e12
    a = (k1 - k2) / (2 * k2 * s)
    b = (k2 - k1) / (2 * k1 * s)
    mu = [(e0 + a * e2) / den, (e0 + b * e1) / den]
    e_mu = [(e1 + a * e12) / den, (e2 + b * e12) / den]
    return mu, e_mu, sc + np.log(den)


def _spec_data(spec, m, params):
    for mode in spec.modes:
        _check_mode(mode, params)
    kappas = tuple(mode.kappa0 for mode in spec.modes)
    with np.errstate(divide="ignore"):
        log_cs = tuple(
            np.log(mode.c0) + m * np.log(reflection_evolution_factor(mode.kappa0, params))
            for mode in spec.modes
        )
    return kappas, log_cs


def _out(x, n):
    x = np.asarray(x).reshape(np.shape(n))
    return float(x) if x.ndim == 0 else x


def jost_reflectionless(N, n, m, spec, params):
    """Jost function values ``mu^-`` at the eigenvalues.

    N = 1: ``mu = 1 / (1 + C_m X^n / (2 kappa0))``.
    N = 2: ``(mu_1, mu_2, D)`` with ``mu_1 = (1 + a E2) / D``,
    ``mu_2 = (1 + b E1) / D``, ``a = (k1-k2)/(2 k2 (k1+k2))``,
    ``b = (k2-k1)/(2 k1 (k1+k2))``, ``E_j = C_{j,m} X_j^n`` and ``D`` the
    two-soliton denominator. These solve the two-point linear system for the
    reflectionless Jost functions; ``u = E1 mu_1 + E2 mu_2``.
    """
    if N != len(spec.modes):
        raise InvalidSpec("N must match the number of modes", N=N)
    kappas, log_cs = _spec_data(spec, m, params)
    mu, _, log_d = _jost_scaled(kappas, log_cs, n, params)
    if N == 1:
        return _out(mu[0], n)
    return _out(mu[0], n), _out(mu[1], n), _out(np.exp(log_d), n)


def reconstruct_eta_from_data(n, kappas, norming, params, calibration=1.0):
    """Reflectionless sum for the potential from eigenvalues and norming constants.

    ``calibration * sum_j [E_j(n+2) mu_j(n+2) - E_j(n) mu_j(n)]`` with
    ``E_j(n) = C_j X_j^n`` and ``mu_j`` the Jost values built from the same
    data. The sum is written in the growing base ``X_j = (p+kappa0)/(p-kappa0)``;
    the overall constant is left to ``calibration``.
    """
    if any(c < 0 for c in norming):
        raise InvalidSpec("norming constants must be non-negative")
    with np.errstate(divide="ignore"):
        log_cs = tuple(np.log(c) for c in norming)
    n = np.asarray(n)
    _, e_mu0, _ = _jost_scaled(kappas, log_cs, n, params)
    _, e_mu2, _ = _jost_scaled(kappas, log_cs, n + 2, params)
    total = sum(b - a for a, b in zip(e_mu0, e_mu2))
    return _out(calibration * total, n)


def reconstruct_eta_reflectionless(N, n, m, spec, params, calibration=1.0):
    """Reflectionless potential at ``(n, m)`` with norming constants evolved to row m."""
    if N != len(spec.modes):
        raise InvalidSpec("N must match the number of modes", N=N)
    kappas, _ = _spec_data(spec, m, params)
    return reconstruct_eta_from_data(n, kappas, norming_constants(spec, m, params), params, calibration)


def calibrate_reconstruction(spec, params, eta_reference, n_ref, m_ref):
    """Single scalar matching the reflectionless sum to a reference ``eta`` value."""
    raw = reconstruct_eta_reflectionless(len(spec.modes), n_ref, m_ref, spec, params)
    if raw == 0.0:
        raise InvalidSpec("reference point carries no signal")
    return float(eta_reference) / raw

