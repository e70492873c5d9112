"""Complete and scaled incomplete Gamma evaluation, plus exact even moments.

The scaled incomplete Gamma is ``Gs(m; U) = exp(U) * integral_U^inf z^(m-1) e^-z dz``,
so ``Gs(m; 0) = Gamma(m)`` and ``Gs(1; U) = 1`` for every U.  The even moments
``G(m) = integral_-inf^inf T^m exp(-T^(p+1)) dT`` are returned as exact constants:
zero for odd m, ``(2/(p+1)) * Gamma((m+1)/(p+1))`` for even m.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import kernels
from .exact import ExactConst, Rational, as_fraction


def reduce_gamma_arg(m: Rational) -> tuple[Fraction, Fraction]:
    """Reduce m to (0, 1] via Gamma(r+1) = r*Gamma(r); returns (arg, factor)
    with Gamma(m) = factor * Gamma(arg)."""
    r = as_fraction(m)
    if r <= 0:
        raise ValueError(f"Gamma argument must be positive, got {r}")
    factor = Fraction(1)
    while r > 1:
        r -= 1
        factor *= r
    return r, factor


def gamma_complete(m: Rational) -> float:
    """Gamma(m) for rational m > 0."""
    r = as_fraction(m)
    if r <= 0:
        raise ValueError(f"Gamma argument must be positive, got {r}")
    return math.gamma(float(r))


def gamma_incomplete_scaled(m: Rational, u: float) -> float:
    """exp(U) * upper incomplete Gamma(m, U) for rational m > 0, U >= 0."""
    r = as_fraction(m)
    if r <= 0:
        raise ValueError(f"Gamma argument must be positive, got {r}")
    if u < 0:
        raise ValueError(f"second argument must be nonnegative, got {u}")
    mf = float(r)
    return kernels.gamma_scaled_scalar(mf, float(u), math.gamma(mf))


def gamma_incomplete_scaled_array(m: Rational, us: np.ndarray) -> np.ndarray:
    """Vectorised scaled incomplete Gamma over an array of U >= 0."""
    r = as_fraction(m)
    if r <= 0:
        raise ValueError(f"Gamma argument must be positive, got {r}")
    us = np.asarray(us, dtype=np.float64)
    if (us < 0).any():
        raise ValueError("second argument must be nonnegative")
    mf = float(r)
    return kernels.gamma_scaled_array(mf, us, math.gamma(mf))


def even_moment(m: int, p: int) -> ExactConst:
    """Exact G(m) = integral of T^m exp(-T^(p+1)) over the real line."""
    if m < 0:
        raise ValueError(f"moment index must be nonnegative, got {m}")
    if m % 2 == 1:
        return ExactConst()
    arg = Fraction(m + 1, p + 1)
    return ExactConst.gamma_term(Fraction(2, p + 1), num=(arg,))
