"""The boundary-layer functions psi_k and the bracketed basis psi_bar_{i,k}.

For a fixed pair (p, L), p odd >= 3, L even < p, psi_k solves

    psi_k'(T) = (p+1) T^p psi_k(T) + T^k + c_k T^L

with c_k the solvability constant (0 for odd k, a ratio of Gamma values for
even k, -1 at k = L).  Pointwise values come from the scaled incomplete Gamma;
for T < 0 the functions extend by parity, psi_k(-T) = (-1)^(k+1) psi_k(T).

The tail expansion psi_k(T) ~ sum_{n >= p - max(k,L)} rho_{-n} T^(-n) follows
from formal substitution into the ODE:

    rho_{-n} = -((n-p-1)/(p+1)) rho_{-(n-p-1)}
               - (1/(p+1)) [n = p-k]  -  (c_k/(p+1)) [n = p-L]

The bracketed function psi_bar_{i,k}(T) subtracts the full polynomial part of
T^i psi_k(T) (all nonnegative powers), so it tends to 0 at both infinities.
Direct evaluation of the subtraction cancels catastrophically for large |T|;
above ``tail_switch`` the tail series is used instead.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction

import numpy as np

from .exact import ExactConst
from .gammafn import even_moment, gamma_incomplete_scaled, gamma_incomplete_scaled_array


class CancellationWarning(UserWarning):
    pass


def check_pl(p: int, L: int) -> None:
    if p < 3 or p % 2 == 0:
        raise ValueError(f"p must be odd and >= 3, got {p}")
    if L < 0 or L >= p or L % 2 == 1:
        raise ValueError(f"L must be even with 0 <= L < p, got {L}")


class PsiTable:
    """Per-(p, L) cache of constants, tail coefficients, moments and evaluators."""

    def __init__(self, p: int, L: int, tail_switch: float = 15.0):
        check_pl(p, L)
        self.p = p
        self.L = L
        self.tail_switch = tail_switch
        self._c: dict[int, ExactConst] = {}
        self._rho: dict[tuple[int, int], ExactConst] = {}
        self._rho_f: dict[tuple[int, int], float] = {}
        self._moment: dict[tuple[int, int], ExactConst] = {}
        # float constants for pointwise evaluation
        self._m = [Fraction(k + 1, p + 1) for k in range(p + 1)]
        self._gamma_m = [math.gamma(float(m)) for m in self._m]
        self._ratio = [self._gamma_m[k] / self._gamma_m[L] for k in range(p + 1)]
        self._c_f: dict[int, float] = {}

    # -- exact constants ---------------------------------------------------

    def c(self, k: int) -> ExactConst:
        """Constant c_k with lambda_{t^k} = c_k eta^(k-L); zero for odd k."""
        if k < 0:
            raise ValueError(f"power must be nonnegative, got {k}")
        if k not in self._c:
            if k % 2 == 1:
                self._c[k] = ExactConst()
            else:
                self._c[k] = ExactConst.gamma_term(
                    -1,
                    num=(Fraction(k + 1, self.p + 1),),
                    den=(Fraction(self.L + 1, self.p + 1),),
                )
        return self._c[k]

    def c_float(self, k: int) -> float:
        if k not in self._c_f:
            self._c_f[k] = self.c(k).to_float()
        return self._c_f[k]

    def G(self, m: int) -> ExactConst:
        return even_moment(m, self.p)

    def rho(self, k: int, n: int) -> ExactConst:
        """Tail coefficient rho_{k,-n} of psi_k(T) ~ sum rho_{k,-n} T^(-n)."""
        if not 0 <= k <= self.p - 1:
            raise ValueError(f"k must be in 0..p-1, got {k}")
        if n < 0:
            return ExactConst()
        key = (k, n)
        if key not in self._rho:
            p = self.p
            if k == self.L:
                val = ExactConst()
            else:
                val = ExactConst()
                prev = n - p - 1
                if prev >= 0:
                    val = val + self.rho(k, prev) * Fraction(-(prev), p + 1)
                if n == p - k:
                    val = val + ExactConst.rational(Fraction(-1, p + 1))
                if n == p - self.L:
                    val = val - self.c(k) / (p + 1)
            self._rho[key] = val
        return self._rho[key]

    def rho_float(self, k: int, n: int) -> float:
        key = (k, n)
        if key not in self._rho_f:
            self._rho_f[key] = self.rho(k, n).to_float()
        return self._rho_f[key]

    def asym_coeffs(self, k: int, depth: int) -> list[ExactConst]:
        """[rho_{k,0}, rho_{k,-1}, ..., rho_{k,-depth}]."""
        return [self.rho(k, n) for n in range(depth + 1)]

    def moment(self, i: int, k: int) -> ExactConst:
        """M_{i,k} = integral T^i psi_k(T) exp(-T^(p+1)) dT, in closed form."""
        if i < 0:
            raise ValueError(f"moment index must be nonnegative, got {i}")
        if not 0 <= k <= self.p - 1:
            raise ValueError(f"k must be in 0..p-1, got {k}")
        key = (i, k)
        if key not in self._moment:
            val = self.G(i + k + 1) + self.c(k) * self.G(i + self.L + 1)
            self._moment[key] = val * Fraction(-1, i + 1)
        return self._moment[key]

    # -- pointwise evaluation ----------------------------------------------

    def psi(self, k: int, T: float) -> float:
        """psi_k(T) for k in 0..p, any real T."""
        if not 0 <= k <= self.p:
            raise ValueError(f"k must be in 0..p, got {k}")
        sign = 1.0
        if T < 0:
            T = -T
            sign = (-1.0) ** (k + 1)
        u = T ** (self.p + 1)
        mk = float(self._m[k])
        gk = gamma_incomplete_scaled(mk, u)
        if k % 2 == 0:
            gl = gamma_incomplete_scaled(float(self._m[self.L]), u)
            val = (self._ratio[k] * gl - gk) / (self.p + 1)
        else:
            val = -gk / (self.p + 1)
        return sign * val

    def psi_array(self, k: int, T: np.ndarray) -> np.ndarray:
        """Vectorised psi_k over a real grid."""
        if not 0 <= k <= self.p:
            raise ValueError(f"k must be in 0..p, got {k}")
        T = np.asarray(T, dtype=np.float64)
        sign = np.where(T < 0, (-1.0) ** (k + 1), 1.0)
        u = np.abs(T) ** (self.p + 1)
        gk = gamma_incomplete_scaled_array(float(self._m[k]), u)
        if k % 2 == 0:
            gl = gamma_incomplete_scaled_array(float(self._m[self.L]), u)
            val = (self._ratio[k] * gl - gk) / (self.p + 1)
        else:
            val = -gk / (self.p + 1)
        return sign * val

    def psi_deriv(self, k: int, T: float) -> float:
        """psi_k'(T) through the defining ODE (exact relation, no differencing)."""
        return ((self.p + 1) * T ** self.p * self.psi(k, T)
                + T ** k + self.c_float(k) * T ** self.L)

    # -- bracketed basis ----------------------------------------------------

    def _check_bar_indices(self, i: int, k: int) -> None:
        if k == self.L or not 0 <= k <= self.p - 1:
            raise ValueError(f"k must be in 0..p-1 and differ from L, got {k}")
        if i < 0:
            raise ValueError(f"i must be nonnegative, got {i}")

    def _tail_depth(self, i: int) -> int:
        return i + 4 * (self.p + 1) + 2

    def psi_bar(self, i: int, k: int, T: float) -> float:
        """psi_bar_{i,k}(T) = T^i psi_k(T) minus the polynomial part of its tail."""
        self._check_bar_indices(i, k)
        if abs(T) > self.tail_switch:
            total = 0.0
            for n in range(i + 1, self._tail_depth(i) + 1):
                r = self.rho_float(k, n)
                if r != 0.0:
                    total += r * T ** (i - n)
            return total
        lead = T ** i * self.psi(k, T)
        val = lead
        for n in range(i + 1):
            r = self.rho_float(k, n)
            if r != 0.0:
                val -= r * T ** (i - n)
        if val != 0.0 and abs(lead) / abs(val) > 1e6:
            warnings.warn(
                f"catastrophic cancellation in psi_bar({i},{k}) at T={T}",
                CancellationWarning)
        return val

    def psi_bar_deriv(self, i: int, k: int, T: float) -> float:
        """d/dT psi_bar_{i,k}(T), assembled analytically."""
        self._check_bar_indices(i, k)
        if abs(T) > self.tail_switch:
            total = 0.0
            for n in range(i + 1, self._tail_depth(i) + 1):
                r = self.rho_float(k, n)
                if r != 0.0:
                    total += (i - n) * r * T ** (i - n - 1)
            return total
        val = T ** i * self.psi_deriv(k, T)
        if i > 0:
            val += i * T ** (i - 1) * self.psi(k, T)
        for n in range(i + 1):
            if i - n >= 1:
                r = self.rho_float(k, n)
                if r != 0.0:
                    val -= (i - n) * r * T ** (i - n - 1)
        return val


_tables: dict[tuple[int, int], PsiTable] = {}


def get_table(p: int, L: int) -> PsiTable:
    key = (p, L)
    if key not in _tables:
        _tables[key] = PsiTable(p, L)
    return _tables[key]
