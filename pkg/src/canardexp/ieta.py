"""Formal rewrite rules for the bounded-solution operator and its solvability data.

``I`` denotes the solution operator of the linear model equation with the
solvability constant chosen so the solution stays bounded through the turning
point; ``lambda(v)`` is that constant divided by eta^(p+1).  The rules:

    I(X^L) = 0                      lambda(t^L) = -1
    I(X^k) = eta^(k+1) psi_k(t/eta)   (0 <= k <= p),  lambda(t^k) = c_k eta^(k-L)
    I(X^m) = (eta^(p+1)/(p+1)) ((m-p) I(X^(m-p-1)) - X^(m-p))      (m > p)
    I(X^i I(X^k)) = (1/(i+1)) (t^(i+1) I(X^k) - I(X^(i+k+1))
                               - lambda(t^k) I(X^(i+L+1)))

``apply_I`` maps a finite raw-term sum (psi-depth <= 1) termwise through these
rules, bracket-reduces the result into a formal series truncated at the
requested order, and aggregates lambda as a series in eta-powers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .algebra import (FormalSeries, RawTerm, collect, reduce_terms, term_order)
from .exact import ExactConst
from .psi import PsiTable

_RECURSION_CAP = 10_000


class RecursionBoundError(RuntimeError):
    """Power-reduction recursion exceeded its explicit bound."""


@dataclass(frozen=True)
class LambdaValue:
    coeff: ExactConst
    eta_power: int


class LambdaSeries:
    """lambda aggregated per eta-power."""

    def __init__(self):
        self.coeffs: dict[int, ExactConst] = {}

    def add(self, coeff: ExactConst, eta_power: int) -> None:
        if coeff.is_zero:
            return
        cur = self.coeffs.get(eta_power, ExactConst()) + coeff
        if cur.is_zero:
            self.coeffs.pop(eta_power, None)
        else:
            self.coeffs[eta_power] = cur

    def get(self, eta_power: int) -> ExactConst:
        return self.coeffs.get(eta_power, ExactConst())

    def to_float(self, eta: float) -> float:
        return sum(c.to_float() * eta ** e for e, c in self.coeffs.items())

    def key(self):
        return tuple(sorted(self.coeffs.items()))

    def __eq__(self, other):
        return isinstance(other, LambdaSeries) and self.key() == other.key()


def I_power_raw(k: int, table: PsiTable, depth: int = 0) -> list[RawTerm]:
    """Raw-term form of I(X^k); psi indices stay within 0..p-1, k != L."""
    if k < 0:
        raise ValueError(f"power must be nonnegative, got {k}")
    if depth > _RECURSION_CAP:
        raise RecursionBoundError(f"power reduction exceeded bound at k={k}")
    p, L = table.p, table.L
    one = ExactConst.rational(1)
    if k == L:
        return []
    if k == p:
        return [RawTerm(ExactConst.rational(Fraction(-1, p + 1)), 0, p + 1, None)]
    if k < p:
        return [RawTerm(one, 0, k + 1, k)]
    # k >= p+1: I(X^k) = (eta^(p+1)/(p+1)) ((k-p) I(X^(k-p-1)) - X^(k-p))
    inner = I_power_raw(k - p - 1, table, depth + 1)
    out = [t.scaled(Fraction(k - p, p + 1), dl=p + 1) for t in inner]
    out.append(RawTerm(ExactConst.rational(Fraction(-1, p + 1)), k - p, p + 1, None))
    return out


def I_power(k: int, table: PsiTable, K: int) -> tuple[FormalSeries, LambdaValue]:
    """Bracket-reduced I(X^k) truncated at order K, with lambda(t^k)."""
    series = reduce_terms(I_power_raw(k, table), table, K)
    lam = LambdaValue(table.c(k), k - table.L)
    return series, lam


def lambda_of(term: RawTerm, table: PsiTable) -> LambdaValue:
    """Solvability coefficient of one raw monomial."""
    if term.psi is None:
        return LambdaValue(term.coeff * table.c(term.i), term.i - table.L + term.l)
    k = term.psi
    if k == table.L:
        return LambdaValue(ExactConst(), 0)
    if k == table.p:
        # psi_p is the constant -1/(p+1)
        c = term.coeff * Fraction(-1, table.p + 1) * table.c(term.i)
        return LambdaValue(c, term.i - table.L + term.l)
    coeff = term.coeff * (-(table.moment(term.i, k)) / table.G(table.L))
    return LambdaValue(coeff, term.i - table.L + term.l)


def I_product_raw(i: int, inner_k: int, table: PsiTable) -> list[RawTerm]:
    """Raw-term form of I(X^i I(X^(inner_k))), inner_k in 0..p."""
    if i < 0:
        raise ValueError(f"power must be nonnegative, got {i}")
    if not 0 <= inner_k <= table.p:
        raise ValueError(f"inner power must be in 0..p, got {inner_k}")
    p, L = table.p, table.L
    inv = Fraction(1, i + 1)
    out: list[RawTerm] = []
    # t^(i+1) I(X^k) / (i+1)
    out.extend(t.scaled(inv, di=i + 1) for t in I_power_raw(inner_k, table))
    # - I(X^(i+k+1)) / (i+1)
    out.extend(t.scaled(-inv) for t in I_power_raw(i + inner_k + 1, table))
    # - lambda(t^k) I(X^(i+L+1)) / (i+1),   lambda(t^k) = c_k eta^(k-L)
    ck = table.c(inner_k)
    if not ck.is_zero:
        out.extend(t.scaled(ck * -inv, dl=inner_k - L)
                   for t in I_power_raw(i + L + 1, table))
    return collect(out)


def I_product(i: int, inner_k: int, table: PsiTable, K: int) -> tuple[FormalSeries, LambdaSeries]:
    raw = I_product_raw(i, inner_k, table)
    series = reduce_terms(raw, table, K)
    # lambda of the input X^i I(X^k) = t^i psi_k eta^(k+1)
    lam = LambdaSeries()
    lv = lambda_of(RawTerm(ExactConst.rational(1), i, inner_k + 1, inner_k), table)
    lam.add(lv.coeff, lv.eta_power)
    return series, lam


def apply_I(terms: Iterable[RawTerm], table: PsiTable, K: int) -> tuple[FormalSeries, LambdaSeries]:
    """Termwise I over a raw sum with psi-depth <= 1; truncates at order K.

    Returns the bracket-reduced image and the aggregated lambda series."""
    lam = LambdaSeries()
    out_raw: list[RawTerm] = []
    for term in collect(terms):
        lv = lambda_of(term, table)
        lam.add(lv.coeff, lv.eta_power)
        if term.psi is None:
            out_raw.extend(t.scaled(term.coeff, dl=term.l)
                           for t in I_power_raw(term.i, table))
        else:
            # t^i psi_k(t/eta) eta^l = eta^(l-k-1) X^i I(X^k)
            shift = term.l - term.psi - 1
            out_raw.extend(t.scaled(term.coeff, dl=shift)
                           for t in I_product_raw(term.i, term.psi, table))
    # keep only contributions that can land at order <= K
    kept = [t for t in collect(out_raw) if term_order(t, table) <= K]
    series = reduce_terms(kept, table, K)
    return series, lam


def D_eta_residual(u_series: FormalSeries, v_terms: Iterable[RawTerm],
                   lam: LambdaSeries, table: PsiTable,
                   t: float, eta: float) -> float:
    """|D(u~)(t) - v~(t) - lambda~ t^L| with analytic derivatives,
    where D(u) = du/dt - (p+1) t^p u / eta^(p+1)."""
    from .algebra import eval_series, eval_series_deriv
    p, L = table.p, table.L
    _, u = eval_series(u_series, table, t, eta)
    du = eval_series_deriv(u_series, table, t, eta)
    lhs = du - (p + 1) * t ** p * u / eta ** (p + 1)
    T = t / eta
    v = 0.0
    for term in v_terms:
        f = term.coeff.to_float() * t ** term.i * eta ** term.l
        if term.psi is not None:
            f *= table.psi(term.psi, T)
        v += f
    rhs = v + lam.to_float(eta) * t ** L
    return abs(lhs - rhs)
