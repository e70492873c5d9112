"""Order-by-order solve of the control parameter and fixed-point iteration.

The problem data is the planar slow-fast equation

    eta^(p+2) du/dt = (p+1) eta t^p u + eta^(p-L+1) alpha t^L
                      + S(t, eta^(p-L+1) alpha) + eta^(p+1) P(t, eta u, eta^(p-L+1) alpha, eta)

with S a polynomial vanishing at alpha = 0 whose monomials t^i alpha^j satisfy
the valuation i + j(p-L+1) > p+1, and P polynomial with u-degree <= 1.

Dividing by eta^(p+1) puts the equation in the model form with right-hand side
v = S / eta^(p+2) + P / eta and the alpha t^L term carried as the solvability
constant, which forces alpha = eta^(L+1) lambda(v).  Because every S monomial
reaches lambda at a strictly positive eta offset, the scalar equations for the
alpha coefficients are triangular and solve order by order.  One sweep of the
truncated operator (solve alpha, apply I to the assembled right-hand side)
gains one eta-order; iterating from zero stabilises all orders <= K after K+1
sweeps, and the extra sweep certifies it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (FormalSeries, NegativeOrderTermError, RawTerm, collect,
                      project, series_to_raw, term_order)
from .exact import ExactConst, as_fraction
from .ieta import LambdaSeries, apply_I
from .psi import PsiTable, check_pl, get_table

AlphaSeries = dict[int, ExactConst]


class NonTriangularError(ValueError):
    """An alpha coefficient equation has alpha-dependence at offset zero."""


class NoStabilizationError(RuntimeError):
    """The last two fixed-point iterates differ at some retained order."""


@dataclass(frozen=True)
class SMonomial:
    i: int          # t-power
    j: int          # alpha-power, >= 1
    coeff: Fraction


@dataclass(frozen=True)
class PMonomial:
    a: int          # t-power
    b: int          # u-power, 0 or 1
    c: int          # alpha-power
    d: int          # eta-power
    coeff: Fraction


@dataclass(frozen=True)
class ProblemSpec:
    p: int
    L: int
    t0: float
    t1: float
    S_monomials: tuple[SMonomial, ...] = ()
    P_monomials: tuple[PMonomial, ...] = ()

    def __post_init__(self):
        check_pl(self.p, self.L)
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if not 0 < self.t1 < self.t0:
            raise ValueError(f"t1 must satisfy 0 < t1 < t0, got {self.t1}")
        shift = self.p - self.L + 1
        for m in self.S_monomials:
            if m.j < 1:
                raise ValueError(
                    f"S monomial t^{m.i} alpha^{m.j}: alpha-power must be >= 1 "
                    "(S(t, 0) = 0)")
            if m.i + m.j * shift <= self.p + 1:
                raise ValueError(
                    f"S monomial t^{m.i} alpha^{m.j} violates the valuation "
                    f"condition {m.i} + {m.j}*{shift} > {self.p + 1}")
            if m.i < 0:
                raise ValueError("S monomial t-power must be nonnegative")
        for m in self.P_monomials:
            if m.b not in (0, 1):
                raise ValueError(
                    f"P monomial u-power must be 0 or 1 (linear case), got {m.b}")
            if min(m.a, m.c, m.d) < 0:
                raise ValueError("P monomial powers must be nonnegative")

    def table(self) -> PsiTable:
        return get_table(self.p, self.L)


def make_problem(p, L, t0, t1, S=(), P=()) -> ProblemSpec:
    """Convenience constructor from (i, j, coeff) and (a, b, c, d, coeff) tuples."""
    return ProblemSpec(
        p, L, float(t0), float(t1),
        tuple(SMonomial(i, j, as_fraction(c)) for i, j, c in S),
        tuple(PMonomial(a, b, cc, d, as_fraction(co)) for a, b, cc, d, co in P))


@dataclass
class ExpansionResult:
    alpha: AlphaSeries
    u: FormalSeries
    order: int
    iterations_used: int
    problem: ProblemSpec = field(repr=False, default=None)

    def alpha_float(self, eta: float) -> float:
        return sum(c.to_float() * eta ** n for n, c in self.alpha.items())


# ---------------------------------------------------------------------------
# series helpers over the exact ring
# ---------------------------------------------------------------------------

def _prune_alpha(a: AlphaSeries) -> AlphaSeries:
    return {n: c for n, c in sorted(a.items()) if not c.is_zero}


def alpha_equal(a: AlphaSeries, b: AlphaSeries) -> bool:
    return _prune_alpha(a) == _prune_alpha(b)


def series_pow(a: AlphaSeries, j: int, max_order: int) -> AlphaSeries:
    """Coefficients of (sum a_n eta^n)^j up to max_order."""
    if max_order < 0:
        return {}
    out: AlphaSeries = {0: ExactConst.rational(1)}
    for _ in range(j):
        nxt: AlphaSeries = {}
        for n1, c1 in out.items():
            for n2, c2 in a.items():
                n = n1 + n2
                if n <= max_order:
                    nxt[n] = nxt.get(n, ExactConst()) + c1 * c2
        out = {n: c for n, c in nxt.items() if not c.is_zero}
    return out


# ---------------------------------------------------------------------------
# right-hand side assembly
# ---------------------------------------------------------------------------

def rhs_series(prob: ProblemSpec, alpha: AlphaSeries, beta: AlphaSeries,
               u: FormalSeries, K: int) -> list[RawTerm]:
    """Raw-term sum for v = S(t, eta^(p-L+1) alpha)/eta^(p+2) + P(...)/eta,
    truncated at grading K.  alpha feeds S, beta feeds P."""
    table = prob.table()
    p, L = prob.p, prob.L
    shift = p - L + 1
    out: list[RawTerm] = []

    for m in prob.S_monomials:
        e_base = m.j * shift - (p + 2)
        apow = series_pow(alpha, m.j, K - e_base)
        for n, c in apow.items():
            term = RawTerm(c * m.coeff, m.i, e_base + n, None)
            if term_order(term, table) <= K:
                out.append(term)

    u_raw = series_to_raw(u, table) if any(m.b == 1 for m in prob.P_monomials) else []

    for m in prob.P_monomials:
        base = m.b + m.c * shift + m.d - 1
        bpow = series_pow(beta, m.c, K - base)
        for n, c in bpow.items():
            cc = c * m.coeff
            if m.b == 0:
                term = RawTerm(cc, m.a, base + n, None)
                if term_order(term, table) <= K:
                    out.append(term)
            else:
                for rt in u_raw:
                    term = RawTerm(cc * rt.coeff, m.a + rt.i,
                                   base + n + rt.l, rt.psi)
                    if term_order(term, table) <= K:
                        out.append(term)
    return collect(out)


# ---------------------------------------------------------------------------
# alpha solve
# ---------------------------------------------------------------------------

def alpha_solve(prob: ProblemSpec, beta: AlphaSeries, u_input: FormalSeries,
                K: int) -> AlphaSeries:
    """Triangular order-by-order solve of alpha = eta^(L+1) lambda(v)."""
    from .ieta import lambda_of

    table = prob.table()
    p, L = prob.p, prob.L
    shift = p - L + 1

    # known part: lambda contributions of P (uses beta and the input series)
    known: AlphaSeries = {}

    def add_known(n: int, c: ExactConst) -> None:
        if 0 <= n <= K and not c.is_zero:
            known[n] = known.get(n, ExactConst()) + c

    u_raw = series_to_raw(u_input, table) if any(m.b == 1 for m in prob.P_monomials) else []
    for m in prob.P_monomials:
        base = m.b + m.c * shift + m.d - 1
        bpow = series_pow(beta, m.c, K)
        for n, c in bpow.items():
            cc = c * m.coeff
            if m.b == 0:
                lv = lambda_of(RawTerm(cc, m.a, base + n, None), table)
                add_known(L + 1 + lv.eta_power, lv.coeff)
            else:
                for rt in u_raw:
                    lv = lambda_of(RawTerm(cc * rt.coeff, m.a + rt.i,
                                           base + n + rt.l, rt.psi), table)
                    add_known(L + 1 + lv.eta_power, lv.coeff)

    # S part: coeff * c_i * eta^offset * alpha^j with offset >= 1 (valuation)
    s_rules = []
    for m in prob.S_monomials:
        offset = m.i + m.j * shift - (p + 1)
        if offset <= 0:
            raise NonTriangularError(
                f"S monomial t^{m.i} alpha^{m.j} couples to alpha at "
                f"nonpositive offset {offset}")
        ci = table.c(m.i)
        if not ci.is_zero:
            s_rules.append((m.j, offset, ci * m.coeff))

    alpha: AlphaSeries = {}
    for n in range(K + 1):
        val = known.get(n, ExactConst())
        for j, offset, c in s_rules:
            if n - offset >= 0:
                apow = series_pow(alpha, j, n - offset)
                cj = apow.get(n - offset)
                if cj is not None:
                    val = val + c * cj
        if not val.is_zero:
            alpha[n] = val
    return alpha


# ---------------------------------------------------------------------------
# truncated operator and fixed point
# ---------------------------------------------------------------------------

def xi_apply(prob: ProblemSpec, beta: AlphaSeries, v_in: FormalSeries,
             K: int) -> tuple[AlphaSeries, FormalSeries, LambdaSeries]:
    """One sweep of the truncated operator on (beta, v_in) in the order-K space."""
    table = prob.table()
    alpha = alpha_solve(prob, beta, v_in, K)
    raw = rhs_series(prob, alpha, beta, v_in, K)
    u, lam = apply_I(raw, table, K)
    return alpha, project(u, K), lam


def expand(prob: ProblemSpec, K: int) -> ExpansionResult:
    """Iterate the truncated operator from zero to its certified fixed point."""
    if K < 0:
        raise ValueError(f"expansion order must be nonnegative, got {K}")
    beta: AlphaSeries = {}
    v = FormalSeries(K)
    prev = None
    iterations = 0
    for sweep in range(K + 2):
        alpha, u, _ = xi_apply(prob, beta, v, K)
        iterations += 1
        if prev is not None:
            pa, pu = prev
            # orders fixed by earlier sweeps must never change again
            fixed = sweep - 1
            if not alpha_equal({n: c for n, c in alpha.items() if n <= fixed},
                               {n: c for n, c in pa.items() if n <= fixed}) \
                    or project(u, min(fixed, K)) != project(pu, min(fixed, K)):
                raise NoStabilizationError(
                    f"sweep {sweep + 1} altered coefficients of order <= {fixed}")
        prev = (alpha, u)
        beta, v = alpha, u
    # the last loop pass compared sweeps K+1 and K+2 over all orders <= K
    pa, pu = prev
    return ExpansionResult(_prune_alpha(pa), pu.prune(), K, iterations, prob)


def max_order_cap() -> int:
    return int(os.environ.get("CANARD_MAX_ORDER", "12"))
