"""Boundary-layer functions: identities, ODE, tails and the bracketed basis."""

import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from canardexp.exact import ExactConst
from canardexp.psi import CancellationWarning, PsiTable, check_pl, get_table

T_GRID = np.linspace(-6.0, 6.0, 101)


def test_check_pl():
    for p, L in [(2, 0), (1, 0), (3, 1), (3, 4), (3, -2), (5, 5)]:
        with pytest.raises(ValueError):
            check_pl(p, L)
    check_pl(3, 0)
    check_pl(5, 4)


def test_psi_L_vanishes(table):
    assert max(abs(table.psi(table.L, T)) for T in T_GRID) <= 1e-12


def test_psi_p_is_constant(table):
    want = -1.0 / (table.p + 1)
    assert max(abs(table.psi(table.p, T) - want) for T in T_GRID) <= 1e-12


def test_parity(table):
    for k in range(table.p + 1):
        for T in np.linspace(0.1, 5.0, 17):
            assert table.psi(k, -T) == pytest.approx(
                (-1.0) ** (k + 1) * table.psi(k, T), abs=1e-15)


def test_ode_against_finite_differences(table):
    h = 1e-5
    for k in range(table.p + 1):
        for T in np.linspace(-5.0, 5.0, 41):
            fd = (table.psi(k, T + h) - table.psi(k, T - h)) / (2 * h)
            assert table.psi_deriv(k, T) == pytest.approx(fd, abs=1e-7)


def test_psi_array_matches_scalar(table):
    for k in range(table.p + 1):
        arr = table.psi_array(k, T_GRID)
        pts = np.array([table.psi(k, T) for T in T_GRID])
        np.testing.assert_allclose(arr, pts, rtol=1e-14, atol=1e-16)


def test_solvability_constants(table):
    p, L = table.p, table.L
    assert table.c(L) == ExactConst.rational(-1)
    for k in range(p + 1):
        if k % 2 == 1:
            assert table.c(k).is_zero
        else:
            want = -math.gamma((k + 1) / (p + 1)) / math.gamma((L + 1) / (p + 1))
            assert table.c_float(k) == pytest.approx(want, rel=1e-14)


def test_rho_recurrence_values():
    # closed values for p=3, L=0: psi_1 ~ -T^-2/4 + T^-6/8 - ...
    t = get_table(3, 0)
    assert t.rho(1, 2) == ExactConst.rational(Fraction(-1, 4))
    assert t.rho(1, 6) == ExactConst.rational(Fraction(1, 8))
    assert t.rho(1, 0).is_zero and t.rho(1, 1).is_zero
    assert all(t.rho(t.L, n).is_zero for n in range(12))


def test_rho_parity_support(table):
    # nonzero tail indices step by p+1 from the two source indices
    p, L = table.p, table.L
    for k in range(p):
        if k == L:
            continue
        sources = {p - k}
        if not table.c(k).is_zero:
            sources.add(p - L)
        allowed = {s + j * (p + 1) for s in sources for j in range(6)}
        for n in range(4 * (p + 1)):
            if not table.rho(k, n).is_zero:
                assert n in allowed


def test_tail_leading_coefficient(table):
    p, L = table.p, table.L
    for k in range(p):
        if k == L:
            continue
        n0 = p - max(k, L) if k % 2 == 0 else p - k
        lead = table.rho_float(k, n0)
        assert lead != 0.0
        got = 30.0 ** n0 * table.psi(k, 30.0)
        assert got / lead == pytest.approx(1.0, abs=1e-3)


def test_moments_against_quadrature(table):
    p = table.p
    for k in range(p):
        for i in range(5):
            direct, _ = quad(
                lambda T: T ** i * table.psi(k, T) * math.exp(-T ** (p + 1)),
                -5.5, 5.5, epsabs=1e-13, limit=200)
            want = table.moment(i, k).to_float()
            assert direct == pytest.approx(want, abs=2e-9)


def test_moment_of_psi_L_and_parity_zeros(table):
    for i in range(6):
        assert table.moment(i, table.L).is_zero
    for k in range(table.p):
        for i in range(6):
            if (i + k) % 2 == 0:
                assert table.moment(i, k).is_zero


def test_psi_bar_decays(table):
    for k in range(table.p):
        if k == table.L:
            continue
        for i in range(3):
            assert abs(table.psi_bar(i, k, 400.0)) < 5e-3
            assert abs(table.psi_bar(i, k, -400.0)) < 5e-3
            near = table.psi_bar(i, k, 40.0)
            if near != 0.0:
                assert abs(table.psi_bar(i, k, 400.0)) < abs(near)


def test_psi_bar_continuity_at_tail_switch(table):
    s = table.tail_switch
    for k in range(table.p):
        if k == table.L:
            continue
        for i in range(3):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", CancellationWarning)
                below = table.psi_bar(i, k, s - 1e-9)
            above = table.psi_bar(i, k, s + 1e-9)
            assert below == pytest.approx(above, rel=1e-5, abs=1e-12)


def test_psi_bar_deriv_against_finite_differences(table):
    h = 1e-5
    for k in range(table.p):
        if k == table.L:
            continue
        for i in range(3):
            for T in [-4.0, -1.2, 0.0, 0.7, 3.5, 20.0]:
                fd = (table.psi_bar(i, k, T + h)
                      - table.psi_bar(i, k, T - h)) / (2 * h)
                assert table.psi_bar_deriv(i, k, T) == pytest.approx(
                    fd, abs=1e-6)


def test_cancellation_warning():
    t = get_table(3, 0)
    # near the switch the polynomial part dominates T^i psi_k by many digits
    with pytest.warns(CancellationWarning):
        t.psi_bar(8, 1, 14.9)


def test_index_validation(table):
    with pytest.raises(ValueError):
        table.psi(table.p + 1, 1.0)
    with pytest.raises(ValueError):
        table.psi_bar(0, table.L, 1.0)
    with pytest.raises(ValueError):
        table.psi_bar(-1, (table.L + 1) % table.p, 1.0)
    with pytest.raises(ValueError):
        table.rho(table.p, 0)
    with pytest.raises(ValueError):
        table.moment(-1, 0)
