"""Graded formal series in powers of eta over the exact coefficient ring.

A ``RawTerm`` is a monomial ``coeff * t^i * psi_k(t/eta) * eta^l`` with at most
one psi factor (linear case).  Its grading is

    ord(t^i psi_k eta^l) = min(p - max(k, L), i) + l,     ord(t^i eta^l) = l

Raw terms are rewritten onto the graded basis by ``bracket_reduce``: the psi
factor is traded for the bracketed function psi_bar_{i,k} plus the polynomial
part of the tail,

    t^i psi_k(t/eta) eta^l
        = eta^(i+l) psi_bar_{i,k}(t/eta) + sum_n rho_{k,-n} t^(i-n) eta^(n+l)

with n running over the nonnegative powers of the tail (0 <= n <= i; the
coefficients below n = p - max(k, L) vanish).  A ``FormalSeries`` collects one
``SeriesElement`` per eta-order: a scalar part, a slow polynomial in t, and
fast coefficients on the psi_bar basis with i <= n and k != L.

Negative eta-powers are legal transiently inside operator pipelines; a negative
order surviving into a series raises ``NegativeOrderTermError``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .exact import ExactConst
from .psi import PsiTable


class NegativeOrderTermError(ValueError):
    """A term with negative eta-order reached a formal series."""


@dataclass(frozen=True)
class RawTerm:
    coeff: ExactConst
    i: int = 0
    l: int = 0
    psi: Optional[int] = None

    def scaled(self, c, dl: int = 0, di: int = 0) -> "RawTerm":
        return RawTerm(self.coeff * c, self.i + di, self.l + dl, self.psi)


def term_order(term: RawTerm, table: PsiTable) -> int:
    """Grading of a raw monomial."""
    if term.psi is None:
        return term.l
    k = term.psi
    return min(table.p - max(k, table.L), term.i) + term.l


def collect(terms: Iterable[RawTerm]) -> list[RawTerm]:
    """Merge raw terms with identical (i, l, psi) keys; drop exact zeros."""
    acc: dict[tuple[int, int, Optional[int]], ExactConst] = {}
    for t in terms:
        key = (t.i, t.l, t.psi)
        acc[key] = acc.get(key, ExactConst()) + t.coeff
    return [RawTerm(c, i, l, psi)
            for (i, l, psi), c in sorted(acc.items(), key=lambda kv: (kv[0][0], kv[0][1], repr(kv[0][2])))
            if not c.is_zero]


@dataclass
class SeriesElement:
    """Order-n slice: scalar a_n, slow polynomial, fast psi_bar coefficients."""
    n: int
    a: ExactConst = field(default_factory=ExactConst)
    slow: dict[int, ExactConst] = field(default_factory=dict)
    fast: dict[tuple[int, int], ExactConst] = field(default_factory=dict)

    def prune(self) -> "SeriesElement":
        self.slow = {i: c for i, c in self.slow.items() if not c.is_zero}
        self.fast = {ik: c for ik, c in self.fast.items() if not c.is_zero}
        return self

    @property
    def is_zero(self) -> bool:
        return self.a.is_zero and not self.slow and not self.fast

    def key(self):
        return (self.n, self.a, tuple(sorted(self.slow.items())),
                tuple(sorted(self.fast.items())))


class FormalSeries:
    """Element of the truncated graded space: series elements for n <= order."""

    def __init__(self, order: int, elements: Optional[dict[int, SeriesElement]] = None):
        self.order = order
        self.elements: dict[int, SeriesElement] = elements if elements is not None else {}

    def element(self, n: int) -> SeriesElement:
        if n < 0:
            raise NegativeOrderTermError(f"negative eta-order {n} in formal series")
        if n not in self.elements:
            self.elements[n] = SeriesElement(n)
        return self.elements[n]

    def add_slow(self, n: int, i: int, c: ExactConst) -> None:
        el = self.element(n)
        el.slow[i] = el.slow.get(i, ExactConst()) + c

    def add_fast(self, n: int, i: int, k: int, c: ExactConst) -> None:
        if i > n:
            raise NegativeOrderTermError(
                f"fast index i={i} exceeds eta-order n={n}")
        el = self.element(n)
        el.fast[(i, k)] = el.fast.get((i, k), ExactConst()) + c

    def add_scalar(self, n: int, c: ExactConst) -> None:
        el = self.element(n)
        el.a = el.a + c

    def prune(self) -> "FormalSeries":
        self.elements = {n: el.prune() for n, el in self.elements.items()
                         if not el.prune().is_zero}
        return self

    @property
    def is_zero(self) -> bool:
        self.prune()
        return not self.elements

    def copy(self) -> "FormalSeries":
        out = FormalSeries(self.order)
        for n, el in self.elements.items():
            out.elements[n] = SeriesElement(n, el.a, dict(el.slow), dict(el.fast))
        return out

    def key(self):
        self.prune()
        return tuple(self.elements[n].key() for n in sorted(self.elements))

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalSeries) and self.key() == other.key()

    def __repr__(self) -> str:
        return f"FormalSeries(order={self.order}, elements={self.elements})"


def project(s: FormalSeries, K: int) -> FormalSeries:
    """Natural projection onto orders <= K; idempotent."""
    out = FormalSeries(K)
    for n, el in s.elements.items():
        if n <= K:
            out.elements[n] = SeriesElement(n, el.a, dict(el.slow), dict(el.fast))
    return out.prune()


def add(s1: FormalSeries, s2: FormalSeries) -> FormalSeries:
    out = s1.copy()
    out.order = max(s1.order, s2.order)
    for n, el in s2.elements.items():
        out.add_scalar(n, el.a)
        for i, c in el.slow.items():
            out.add_slow(n, i, c)
        for (i, k), c in el.fast.items():
            out.add_fast(n, i, k, c)
    return out.prune()


def scale(c: ExactConst, s: FormalSeries) -> FormalSeries:
    out = FormalSeries(s.order)
    for n, el in s.elements.items():
        out.elements[n] = SeriesElement(
            n, el.a * c,
            {i: v * c for i, v in el.slow.items()},
            {ik: v * c for ik, v in el.fast.items()})
    return out.prune()


def bracket_reduce(term: RawTerm, table: PsiTable, out: FormalSeries,
                   max_order: Optional[int] = None) -> None:
    """Rewrite one raw term onto the graded basis, accumulating into ``out``.

    Contributions of order above ``max_order`` are dropped (truncation)."""
    cap = out.order if max_order is None else max_order
    if term.coeff.is_zero:
        return
    if term.psi is None:
        if term.l <= cap:
            if term.l < 0:
                raise NegativeOrderTermError(
                    f"slow term t^{term.i} eta^{term.l} has negative order")
            out.add_slow(term.l, term.i, term.coeff)
        return
    k = term.psi
    if k == table.L:
        return  # psi_L = 0
    if k == table.p:
        # psi_p is the constant -1/(p+1)
        c = term.coeff * Fraction(-1, table.p + 1)
        bracket_reduce(RawTerm(c, term.i, term.l, None), table, out, cap)
        return
    if not 0 <= k <= table.p - 1:
        raise ValueError(f"psi index must be in 0..p, got {k}")
    i, l = term.i, term.l
    n_fast = i + l
    if n_fast <= cap:
        if n_fast < 0 or l < 0:
            raise NegativeOrderTermError(
                f"fast term t^{i} psi_{k} eta^{l} has negative order")
        out.add_fast(n_fast, i, k, term.coeff)
    for n in range(i + 1):
        r = table.rho(k, n)
        if not r.is_zero and 0 <= n + l <= cap:
            out.add_slow(n + l, i - n, term.coeff * r)


def reduce_terms(terms: Iterable[RawTerm], table: PsiTable, K: int) -> FormalSeries:
    out = FormalSeries(K)
    for t in collect(terms):
        bracket_reduce(t, table, out)
    return out.prune()


def expand_element_to_raw(el: SeriesElement, table: PsiTable) -> list[RawTerm]:
    """Expand one series element back into raw monomials (psi_bar unfolded
    through the bracket identity); used when a series feeds an operator."""
    out: list[RawTerm] = []
    for i, c in el.slow.items():
        out.append(RawTerm(c, i, el.n, None))
    for (i, k), c in el.fast.items():
        # psi_bar_{i,k}(t/eta) eta^n = t^i psi_k(t/eta) eta^(n-i) - tail polynomial
        out.append(RawTerm(c, i, el.n - i, k))
        for n in range(i + 1):
            r = table.rho(k, n)
            if not r.is_zero:
                out.append(RawTerm(c * r * Fraction(-1), i - n, el.n - i + n, None))
    return out


def series_to_raw(s: FormalSeries, table: PsiTable) -> list[RawTerm]:
    out: list[RawTerm] = []
    for el in s.elements.values():
        out.extend(expand_element_to_raw(el, table))
    return collect(out)


def eval_series(s: FormalSeries, table: PsiTable, t: float, eta: float) -> tuple[float, float]:
    """Numeric substitution: returns (alpha value, u value) at (t, eta)."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    T = t / eta
    alpha = 0.0
    u = 0.0
    for n in sorted(s.elements):
        el = s.elements[n]
        en = eta ** n
        alpha += el.a.to_float() * en
        acc = 0.0
        for i, c in el.slow.items():
            acc += c.to_float() * t ** i
        for (i, k), c in el.fast.items():
            acc += c.to_float() * table.psi_bar(i, k, T)
        u += acc * en
    return alpha, u


def eval_series_deriv(s: FormalSeries, table: PsiTable, t: float, eta: float) -> float:
    """d/dt of the u-part of the substituted series, assembled analytically."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    T = t / eta
    du = 0.0
    for n in sorted(s.elements):
        el = s.elements[n]
        en = eta ** n
        acc = 0.0
        for i, c in el.slow.items():
            if i >= 1:
                acc += c.to_float() * i * t ** (i - 1)
        for (i, k), c in el.fast.items():
            acc += c.to_float() * table.psi_bar_deriv(i, k, T) / eta
        du += acc * en
    return du
