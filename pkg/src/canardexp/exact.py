"""Exact coefficient ring: rational combinations of Gamma values at rational points.

An ``ExactConst`` is a finite sum of terms ``q * prod Gamma(n_j) / prod Gamma(d_j)``
with ``q`` rational and all Gamma arguments rational in (0, 1].  Arguments outside
(0, 1] are reduced through Gamma(r+1) = r*Gamma(r), absorbing the rational factor
into ``q``, so equality of canonical forms is decidable syntactic equality.  No
attempt is made to decide deeper transcendental identities among Gamma values;
the recurrence is the only rewrite rule.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Union

Rational = Union[int, Fraction, str]


def as_fraction(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def _reduce_arg(q: Fraction, r: Fraction, inverse: bool) -> tuple[Fraction, Fraction | None]:
    """Reduce a Gamma argument into (0, 1], folding the recurrence factors into q."""
    if r <= 0:
        raise ValueError(f"Gamma argument must be positive, got {r}")
    while r > 1:
        r -= 1
        q = q / r if inverse else q * r
    if r == 1:  # Gamma(1) = 1
        return q, None
    return q, r


def _canonical(terms: Iterable[tuple[Fraction, tuple[Fraction, ...], tuple[Fraction, ...]]]):
    merged: dict[tuple[tuple[Fraction, ...], tuple[Fraction, ...]], Fraction] = {}
    for q, num, den in terms:
        if q == 0:
            continue
        nn: list[Fraction] = []
        for r in num:
            q, r2 = _reduce_arg(q, r, inverse=False)
            if r2 is not None:
                nn.append(r2)
        dd: list[Fraction] = []
        for r in den:
            q, r2 = _reduce_arg(q, r, inverse=True)
            if r2 is not None:
                dd.append(r2)
        # cancel common Gamma factors
        for r in list(nn):
            if r in dd:
                nn.remove(r)
                dd.remove(r)
        key = (tuple(sorted(nn)), tuple(sorted(dd)))
        merged[key] = merged.get(key, Fraction(0)) + q
    out = tuple(
        (q, num, den)
        for (num, den), q in sorted(merged.items())
        if q != 0
    )
    return out


class ExactConst:
    """Immutable element of the exact coefficient ring."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=()):
        object.__setattr__(self, "terms", _canonical(terms))
        object.__setattr__(self, "_hash", hash(self.terms))

    def __setattr__(self, *a):
        raise AttributeError("ExactConst is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def rational(cls, q: Rational) -> "ExactConst":
        return cls([(as_fraction(q), (), ())])

    @classmethod
    def gamma_term(cls, q: Rational, num: Iterable[Rational] = (), den: Iterable[Rational] = ()) -> "ExactConst":
        return cls([(as_fraction(q),
                     tuple(as_fraction(r) for r in num),
                     tuple(as_fraction(r) for r in den))])

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "ExactConst") -> "ExactConst":
        if not isinstance(other, ExactConst):
            return NotImplemented
        return ExactConst(self.terms + other.terms)

    def __sub__(self, other: "ExactConst") -> "ExactConst":
        return self + (-other)

    def __neg__(self) -> "ExactConst":
        return ExactConst([(-q, n, d) for q, n, d in self.terms])

    def __mul__(self, other) -> "ExactConst":
        if isinstance(other, ExactConst):
            return ExactConst([
                (q1 * q2, n1 + n2, d1 + d2)
                for q1, n1, d1 in self.terms
                for q2, n2, d2 in other.terms
            ])
        if isinstance(other, (int, Fraction)):
            f = as_fraction(other)
            return ExactConst([(q * f, n, d) for q, n, d in self.terms])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExactConst":
        if isinstance(other, (int, Fraction)):
            f = as_fraction(other)
            if f == 0:
                raise ZeroDivisionError("division of ExactConst by zero")
            return ExactConst([(q / f, n, d) for q, n, d in self.terms])
        if isinstance(other, ExactConst):
            if len(other.terms) != 1:
                raise ValueError("can only divide by a single-term ExactConst")
            q, n, d = other.terms[0]
            inv = ExactConst([(1 / q, d, n)])
            return self * inv
        return NotImplemented

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactConst) and self.terms == other.terms

    def __hash__(self) -> int:
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    # -- evaluation and rendering -----------------------------------------

    def to_float(self) -> float:
        total = 0.0
        for q, num, den in self.terms:
            v = float(q)
            for r in num:
                v *= math.gamma(float(r))
            for r in den:
                v /= math.gamma(float(r))
            total += v
        return total

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for q, num, den in self.terms:
            s = str(q)
            for r in num:
                s += f"*G({r})"
            for r in den:
                s += f"/G({r})"
            parts.append(s)
        return " + ".join(parts)

    _TERM_RE = re.compile(
        r"^(-?\d+(?:/\d+)?)((?:[*/]G\(\d+(?:/\d+)?\))*)$"
    )
    _FACTOR_RE = re.compile(r"([*/])G\((\d+(?:/\d+)?)\)")

    @classmethod
    def parse(cls, text: str) -> "ExactConst":
        text = text.strip()
        if text == "0":
            return cls()
        terms = []
        for part in text.split(" + "):
            m = cls._TERM_RE.match(part.strip())
            if m is None:
                raise ValueError(f"cannot parse ExactConst term: {part!r}")
            q = Fraction(m.group(1))
            num, den = [], []
            for op, arg in cls._FACTOR_RE.findall(m.group(2)):
                (num if op == "*" else den).append(Fraction(arg))
            terms.append((q, tuple(num), tuple(den)))
        return cls(terms)

    def __repr__(self) -> str:
        return f"ExactConst({self.render()})"


ZERO = ExactConst()
ONE = ExactConst.rational(1)
