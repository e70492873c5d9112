"""Hot numeric kernels for the scaled upper incomplete Gamma function.

The scaled function is ``gs(m, U) = exp(U) * integral_U^inf z^(m-1) exp(-z) dz``.
It stays O(U^(m-1)) for large U, so evaluating it directly (instead of the
unscaled integral, which underflows while the exp(U) prefactor overflows) is
what makes the boundary-layer functions computable on wide grids.

Two evaluation routes, switched at U = m + 1:

* power series of the lower incomplete Gamma for small U,
* Lentz continued fraction for the upper incomplete Gamma otherwise,
  computed in scaled form ``U^m * CF``.

The numba-compiled versions are the default.  Setting the environment variable
``CANARDEXP_NO_NUMBA=1`` before import selects a pure-numpy fallback with the
same algorithm (vectorised with convergence masks); ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import math
import os

import numpy as np

_MAX_ITER = 500
_REL_TOL = 1e-15
_TINY = 1e-300

USE_NUMBA = os.environ.get("CANARDEXP_NO_NUMBA", "") not in ("1", "true", "yes")


class KernelConvergenceError(RuntimeError):
    """Internal series/continued-fraction iteration exceeded its bound."""


# ---------------------------------------------------------------------------
# scalar implementations (numba-compiled when enabled)
# ---------------------------------------------------------------------------

def _gs_series(m: float, u: float, gamma_m: float) -> float:
    # exp(u)*Gamma(m) - u^m * sum_n u^n / (m (m+1) ... (m+n)); valid for u < m+1
    if u == 0.0:
        return gamma_m
    ap = m
    term = 1.0 / m
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= u / ap
        total += term
        if abs(term) < abs(total) * _REL_TOL:
            return math.exp(u) * gamma_m - math.pow(u, m) * total
    return math.nan


def _gs_cf(m: float, u: float) -> float:
    # u^m * CF, modified Lentz; valid for u >= m+1 > 0
    b = u + 1.0 - m
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - m)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _REL_TOL:
            return math.pow(u, m) * h
    return math.nan


def _gs_scalar(m: float, u: float, gamma_m: float) -> float:
    if u < m + 1.0:
        return _gs_series(m, u, gamma_m)
    return _gs_cf(m, u)


def _gs_array_loop(m: float, us, gamma_m: float, out) -> None:
    for j in range(us.shape[0]):
        out[j] = _gs_scalar(m, us[j], gamma_m)


if USE_NUMBA:
    import numba

    _gs_series = numba.njit(cache=True)(_gs_series)
    _gs_cf = numba.njit(cache=True)(_gs_cf)
    _gs_scalar = numba.njit(cache=True)(_gs_scalar)
    _gs_array_loop = numba.njit(cache=True)(_gs_array_loop)


# ---------------------------------------------------------------------------
# pure-numpy fallback (vectorised with convergence masks)
# ---------------------------------------------------------------------------

def _gs_series_np(m: float, u: np.ndarray, gamma_m: float) -> np.ndarray:
    ap = m
    term = np.full(u.shape, 1.0 / m)
    total = term.copy()
    active = np.ones(u.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        ap += 1.0
        term = term * (u / ap)
        total = np.where(active, total + term, total)
        active &= np.abs(term) >= np.abs(total) * _REL_TOL
        if not active.any():
            break
    else:
        total[active] = np.nan
    res = np.exp(u) * gamma_m - np.power(u, m) * total
    return np.where(u == 0.0, gamma_m, res)


def _gs_cf_np(m: float, u: np.ndarray) -> np.ndarray:
    b = u + 1.0 - m
    c = np.full(u.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(u.shape, dtype=bool)
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - m)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _REL_TOL
        if not active.any():
            break
    else:
        h[active] = np.nan
    return np.power(u, m) * h


def _gs_numpy(m: float, us: np.ndarray, gamma_m: float) -> np.ndarray:
    out = np.empty(us.shape)
    small = us < m + 1.0
    if small.any():
        out[small] = _gs_series_np(m, us[small], gamma_m)
    if (~small).any():
        out[~small] = _gs_cf_np(m, us[~small])
    return out


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def gamma_scaled_scalar(m: float, u: float, gamma_m: float) -> float:
    """Scaled upper incomplete Gamma at a single point."""
    if USE_NUMBA:
        v = _gs_scalar(m, u, gamma_m)
    else:
        v = float(_gs_numpy(m, np.array([u]), gamma_m)[0])
    if math.isnan(v):
        raise KernelConvergenceError(
            f"incomplete Gamma iteration did not converge for m={m}, U={u}")
    return v


def gamma_scaled_array(m: float, us: np.ndarray, gamma_m: float) -> np.ndarray:
    """Scaled upper incomplete Gamma on an array of nonnegative arguments."""
    us = np.ascontiguousarray(us, dtype=np.float64)
    if USE_NUMBA:
        out = np.empty(us.shape)
        _gs_array_loop(m, us, gamma_m, out)
    else:
        out = _gs_numpy(m, us, gamma_m)
    if np.isnan(out).any():
        raise KernelConvergenceError(
            f"incomplete Gamma iteration did not converge for m={m}")
    return out
