"""Quadrature oracles, residual sweeps, freeness fits and the self-test."""

import numpy as np
import pytest

from canardexp.engine import expand, make_problem
from canardexp.exact import ExactConst
from canardexp.psi import PsiTable, get_table
from canardexp.validate import (EvalConfig, ValidationReport, fit_loglog,
                                freeness_fit, numeric_xi, order_sweep, quad_I,
                                quad_lambda, residual, residual_pointwise,
                                selftest_suite)


def test_eval_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(eta_list=(0.1, 0.2))          # not decreasing
    with pytest.raises(ValueError):
        EvalConfig(eta_list=(0.2, -0.1))
    with pytest.raises(ValueError):
        EvalConfig(grid_n=100)                   # even
    with pytest.raises(ValueError):
        EvalConfig(grid_n=51)                    # too small
    assert len(EvalConfig().grid()) == 101


def test_quad_identity_rules(table):
    p, L = table.p, table.L
    ts = np.linspace(-0.8, 0.8, 7)
    for eta in (0.5, 0.25):
        zero = quad_I(lambda y: y ** L, eta, ts, p, L)
        assert float(np.max(np.abs(zero))) <= 1e-9
        const = quad_I(lambda y: y ** p, eta, ts, p, L)
        want = -eta ** (p + 1) / (p + 1)
        assert float(np.max(np.abs(const - want))) <= 1e-9


def test_quad_parity():
    # image of an even input is odd and vice versa
    p, L = 3, 0
    eta = 0.3
    ts = np.array([0.1, 0.35, 0.6])
    even_in = quad_I(lambda y: y ** 2, eta, ts, p, L)
    even_in_neg = quad_I(lambda y: y ** 2, eta, -ts, p, L)
    np.testing.assert_allclose(even_in_neg, -even_in, atol=1e-9)
    odd_in = quad_I(lambda y: y ** 3, eta, ts, p, L)
    odd_in_neg = quad_I(lambda y: y ** 3, eta, -ts, p, L)
    np.testing.assert_allclose(odd_in_neg, odd_in, atol=1e-9)


def test_quad_lambda_matches_constants():
    t = get_table(3, 0)
    for k in range(5):
        eta = 0.4
        got = quad_lambda(lambda y, k=k: y ** k, eta, 3, 0)
        want = t.c_float(k) * eta ** k
        assert got == pytest.approx(want, abs=1e-12)


def test_residual_zero_for_exact_solutions(toy_problem, linear_problem):
    grid = np.linspace(-0.8, 0.8, 41)
    for prob in (toy_problem, linear_problem):
        res = expand(prob, 3)
        for eta in (0.4, 0.2, 0.1):
            assert residual(prob, res, eta, grid) < 1e-12


def test_residual_of_zero_series(toy_problem):
    # the empty series leaves the unbalanced constant forcing, scale eta^(p+1)
    from canardexp.algebra import FormalSeries
    from canardexp.engine import ExpansionResult
    res = ExpansionResult({}, FormalSeries(0), 0, 0, toy_problem)
    for eta in (0.4, 0.2):
        r = residual_pointwise(toy_problem, res, eta, 0.3)
        assert r == pytest.approx(eta ** 4, rel=1e-12)


def test_order_sweep_pass_exact(toy_problem):
    rep = order_sweep(toy_problem, 2, EvalConfig())
    assert rep.passed
    assert rep.checks[0].name == "residual-exact"
    assert rep.slope is None


def test_order_sweep_slope(bench_problem):
    rep = order_sweep(bench_problem, 2, EvalConfig())
    assert rep.passed
    assert rep.slope == pytest.approx(4.0, abs=0.1)
    rep3 = order_sweep(bench_problem, 3, EvalConfig())
    assert rep3.passed
    assert rep3.slope > rep.slope


def test_fit_loglog():
    etas = [0.4, 0.2, 0.1, 0.05]
    vals = [3.0 * e ** 2 for e in etas]
    slope, r2 = fit_loglog(etas, vals)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_numeric_one_sweep_matches_engine(bench_problem):
    from canardexp.algebra import FormalSeries, eval_series
    from canardexp.engine import xi_apply
    table = bench_problem.table()
    K = 6
    alpha, u, _ = xi_apply(bench_problem, {}, FormalSeries(K), K)
    eta = 0.3
    ts = np.linspace(-0.6, 0.6, 5)
    a_num, u_num = numeric_xi(bench_problem, 0.0, lambda t: 0.0, eta, ts)
    a_form = sum(c.to_float() * eta ** n for n, c in alpha.items())
    u_form = np.array([eval_series(u, table, t, eta)[1] for t in ts])
    # agreement up to the order-K truncation error
    assert abs(a_form - a_num) <= 10 * eta ** (K + 1)
    assert float(np.max(np.abs(u_form - u_num))) <= 10 * eta ** (K + 1)


def test_freeness_recovery():
    cfg = EvalConfig()
    err, cond = freeness_fit(2, 3, 0, cfg)
    assert err <= 1e-6
    assert cond < 1e10
    # zero element recovers exactly zero
    from canardexp.validate import _basis_functions
    n = len(_basis_functions(2, get_table(3, 0)))
    err0, _ = freeness_fit(2, 3, 0, cfg, coeffs=np.zeros(n))
    assert err0 <= 1e-12
    # single basis element
    one = np.zeros(n)
    one[n // 2] = 1.0
    err1, _ = freeness_fit(2, 3, 0, cfg, coeffs=one)
    assert err1 <= 1e-9


def test_selftest_passes():
    rep = selftest_suite()
    assert rep.passed
    assert "overall: PASS" in rep.render()


class _BadConstTable(PsiTable):
    # wrong solvability constant; breaks the ODE relation and the moments
    def c(self, k):
        val = super().c(k)
        return val * 2 if k == 2 else val


class _BadRhoTable(PsiTable):
    # tail recurrence off by a factor; breaks the tail-coefficient check
    def rho(self, k, n):
        val = super().rho(k, n)
        return val * 2 if (k, n) == (1, self.p - 1) else val


def test_selftest_negative_control_bad_constant():
    rep = selftest_suite(pairs=((3, 0),),
                         table_factory=lambda p, L: _BadConstTable(p, L))
    assert not rep.passed
    failed = [c.name for c in rep.checks if not c.passed]
    assert any("ODE" in name or "moment" in name for name in failed)


def test_selftest_negative_control_bad_tail():
    rep = selftest_suite(pairs=((3, 0),),
                         table_factory=lambda p, L: _BadRhoTable(p, L))
    assert not rep.passed
    failed = [c.name for c in rep.checks if not c.passed]
    assert any("tail" in name for name in failed)


def test_report_render_and_dict():
    rep = ValidationReport()
    rep.per_eta_residual[0.4] = 1e-3
    rep.add("demo", 0.5, 1.0)
    text = rep.render()
    assert "[PASS] demo" in text
    d = rep.to_dict()
    assert d["passed"] is True
