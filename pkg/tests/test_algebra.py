"""Graded series arithmetic, bracket reduction and evaluation."""

import random
from fractions import Fraction

import pytest

from canardexp.algebra import (FormalSeries, NegativeOrderTermError, RawTerm,
                               add, bracket_reduce, collect, eval_series,
                               eval_series_deriv, project, reduce_terms, scale,
                               series_to_raw, term_order)
from canardexp.exact import ExactConst
from canardexp.psi import get_table


def C(q):
    return ExactConst.rational(Fraction(q))


def random_series(rng, K, p, L, slow_deg=3):
    s = FormalSeries(K)
    for n in range(K + 1):
        for i in range(slow_deg + 1):
            if rng.random() < 0.5:
                s.add_slow(n, i, C(Fraction(rng.randint(-4, 4), rng.randint(1, 5))))
        for i in range(n + 1):
            for k in range(p):
                if k != L and rng.random() < 0.4:
                    s.add_fast(n, i, k, C(Fraction(rng.randint(-4, 4),
                                                   rng.randint(1, 5))))
    return s.prune()


def eval_raw(terms, table, t, eta):
    T = t / eta
    total = 0.0
    for tm in terms:
        v = tm.coeff.to_float() * t ** tm.i * eta ** tm.l
        if tm.psi is not None:
            v *= table.psi(tm.psi, T)
        total += v
    return total


def test_collect_merges_and_drops_zeros():
    terms = [RawTerm(C(1), 2, 1, None), RawTerm(C(2), 2, 1, None),
             RawTerm(C(-3), 2, 1, None), RawTerm(C(1), 0, 0, 1)]
    out = collect(terms)
    assert out == [RawTerm(C(1), 0, 0, 1)]


def test_term_order():
    t = get_table(3, 0)
    assert term_order(RawTerm(C(1), 4, 2, None), t) == 2
    assert term_order(RawTerm(C(1), 1, 0, 1), t) == 1   # min(3-1, 1) + 0
    assert term_order(RawTerm(C(1), 5, 1, 2), t) == 2   # min(3-2, 5) + 1


def test_bracket_reduce_numeric(table):
    # reduced series must evaluate identically to the raw monomial
    rng = random.Random(3)
    for _ in range(30):
        k = rng.choice([k for k in range(table.p) if k != table.L])
        tm = RawTerm(C(Fraction(rng.randint(1, 3), rng.randint(1, 3))),
                     rng.randint(0, 4), rng.randint(0, 2), k)
        s = reduce_terms([tm], table, K=20)
        for t_val, eta in [(0.5, 0.25), (-0.7, 0.2), (0.3, 0.4)]:
            want = eval_raw([tm], table, t_val, eta)
            _, got = eval_series(s, table, t_val, eta)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_bracket_reduce_psi_L_and_psi_p(table):
    out = FormalSeries(6)
    bracket_reduce(RawTerm(C(1), 2, 1, table.L), table, out)
    assert out.prune().is_zero
    out = FormalSeries(6)
    bracket_reduce(RawTerm(C(1), 0, 0, table.p), table, out)
    el = out.elements[0]
    assert el.slow == {0: C(Fraction(-1, table.p + 1))}


def test_negative_order_rejected(table):
    out = FormalSeries(4)
    with pytest.raises(NegativeOrderTermError):
        bracket_reduce(RawTerm(C(1), 0, -1, None), table, out)
    with pytest.raises(NegativeOrderTermError):
        out.add_fast(1, 2, (table.L + 1) % table.p, C(1))


def test_series_roundtrip_exact(table):
    # reduce(series_to_raw(s)) == s, exactly in the coefficient ring
    rng = random.Random(11)
    for trial in range(10):
        s = random_series(rng, 4, table.p, table.L)
        back = reduce_terms(series_to_raw(s, table), table, K=4)
        assert back == s


def test_project_add_scale(table):
    rng = random.Random(5)
    s = random_series(rng, 5, table.p, table.L)
    assert project(project(s, 3), 3) == project(s, 3)
    assert project(s, 5) == s
    two = add(s, s)
    assert two == scale(C(2), s)
    assert add(s, scale(C(-1), s)).is_zero


def test_eval_series_deriv(table):
    rng = random.Random(9)
    s = random_series(rng, 3, table.p, table.L)
    h = 1e-6
    for t_val, eta in [(0.4, 0.3), (-0.5, 0.2)]:
        fd = (eval_series(s, table, t_val + h, eta)[1]
              - eval_series(s, table, t_val - h, eta)[1]) / (2 * h)
        assert eval_series_deriv(s, table, t_val, eta) == pytest.approx(
            fd, rel=1e-6, abs=1e-6)


def test_eval_rejects_bad_eta(table):
    s = FormalSeries(2)
    with pytest.raises(ValueError):
        eval_series(s, table, 0.1, 0.0)
    with pytest.raises(ValueError):
        eval_series_deriv(s, table, 0.1, -0.2)
