"""Independent numerical oracles: quadrature form of the solution operator,
equation residuals, accuracy-order sweeps and basis-recovery fits.

Everything here deliberately avoids the formal rewrite engine's evaluation
path.  The solution operator is computed from its exact integral
representation

    I(v)(t) = e^((t/eta)^(p+1)) * int_{+inf}^t (v(y) - lambda_v y^L) e^(-(y/eta)^(p+1)) dy

with the exponent always assembled as a difference before exponentiation, and
with the parity of the operator (image of an even function is odd, and vice
versa) used to reach t < 0 without integrating through the unstable direction.
This integral form sidesteps the exponential instability that makes shooting
hopeless near a canard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .algebra import FormalSeries, eval_series, eval_series_deriv
from .engine import ExpansionResult, ProblemSpec, expand
from .psi import PsiTable, get_table

_EXP_CUT = 708.0  # exp underflow threshold for the weight


class QuadFailError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class IllConditionedError(RuntimeError):
    """Basis-recovery fit is too ill-conditioned to be conclusive."""


@dataclass
class EvalConfig:
    eta_list: tuple[float, ...] = (0.4, 0.3, 0.2, 0.15, 0.1)
    grid_n: int = 101
    quad_rel_tol: float = 1e-10
    t1: float = 0.8

    def __post_init__(self):
        if any(e <= 0 for e in self.eta_list):
            raise ValueError("eta values must be positive")
        if list(self.eta_list) != sorted(self.eta_list, reverse=True):
            raise ValueError("eta values must be strictly decreasing")
        if self.grid_n < 101 or self.grid_n % 2 == 0:
            raise ValueError("grid_n must be an odd integer >= 101")

    def grid(self) -> np.ndarray:
        return np.linspace(-self.t1, self.t1, self.grid_n)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float


@dataclass
class ValidationReport:
    per_eta_residual: dict[float, float] = field(default_factory=dict)
    slope: Optional[float] = None
    slope_r2: Optional[float] = None
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, measured: float, tolerance: float,
            larger_is_better: bool = False) -> bool:
        ok = measured >= tolerance if larger_is_better else measured <= tolerance
        self.checks.append(CheckResult(name, ok, measured, tolerance))
        return ok

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = []
        for eta in sorted(self.per_eta_residual, reverse=True):
            lines.append(f"residual  eta={eta:<8g} {self.per_eta_residual[eta]:.6e}")
        if self.slope is not None:
            lines.append(f"fitted slope {self.slope:.4f}  r2={self.slope_r2:.6f}")
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}: measured={c.measured:.6e} "
                         f"tolerance={c.tolerance:.6e}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "per_eta_residual": {str(k): v for k, v in self.per_eta_residual.items()},
            "slope": self.slope,
            "slope_r2": self.slope_r2,
            "checks": [vars(c) for c in self.checks],
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# quadrature form of the operator
# ---------------------------------------------------------------------------

def _quad(f, a, b, rel_tol):
    val, err = quad(f, a, b, epsabs=1e-14, epsrel=rel_tol, limit=400)
    if err > max(abs(val) * math.sqrt(rel_tol), 1e-11):
        raise QuadFailError(
            f"quadrature error estimate {err:.2e} too large for value {val:.2e}")
    return val


def quad_lambda(v: Callable[[float], float], eta: float, p: int, L: int,
                rel_tol: float = 1e-10) -> float:
    """Moment quotient lambda_v by adaptive quadrature in T = y/eta."""
    tc = _EXP_CUT ** (1.0 / (p + 1))
    w = lambda T: math.exp(-T ** (p + 1))
    num = _quad(lambda T: v(eta * T) * w(T), -tc, tc, rel_tol)
    den = _quad(lambda T: (eta * T) ** L * w(T), -tc, tc, rel_tol)
    return -num / den


def quad_I(v: Callable[[float], float], eta: float, t_grid: Sequence[float],
           p: int, L: int, rel_tol: float = 1e-10,
           lam: Optional[float] = None) -> np.ndarray:
    """Direct quadrature of the bounded-solution operator on a t-grid."""
    if lam is None:
        lam = quad_lambda(v, eta, p, L, rel_tol)

    def forward(tau: float, vf: Callable[[float], float], lamv: float) -> float:
        # -eta * int_tau^inf (vf(eta T) + lamv (eta T)^L) e^{-(T^{p+1}-tau^{p+1})} dT
        tau_pow = tau ** (p + 1)
        t_up = (_EXP_CUT + tau_pow) ** (1.0 / (p + 1))
        f = lambda T: ((vf(eta * T) + lamv * (eta * T) ** L)
                       * math.exp(-(T ** (p + 1) - tau_pow)))
        return -eta * _quad(f, tau, t_up, rel_tol)

    out = np.empty(len(t_grid))
    v_even = lambda y: 0.5 * (v(y) + v(-y))
    v_odd = lambda y: 0.5 * (v(y) - v(-y))
    for idx, t in enumerate(t_grid):
        tau = t / eta
        if tau >= 0:
            out[idx] = forward(tau, v, lam)
        else:
            # image of even part is odd, image of odd part is even
            ie = forward(-tau, v_even, lam)
            io = forward(-tau, v_odd, 0.0)
            out[idx] = -ie + io
    return out


# ---------------------------------------------------------------------------
# numeric (topological) one-sweep operator, for formal-equivalence checks
# ---------------------------------------------------------------------------

def numeric_xi(prob: ProblemSpec, beta_val: float,
               v_func: Callable[[float], float], eta: float,
               t_grid: Sequence[float], rel_tol: float = 1e-10,
               alpha_iters: int = 60) -> tuple[float, np.ndarray]:
    """One sweep of the contraction at fixed eta, by quadrature.

    beta_val is the numeric control value fed to P; v_func(t) the numeric
    input function.  Returns (alpha value, u values on the grid)."""
    p, L = prob.p, prob.L
    shift = p - L + 1

    def rhs(alpha: float) -> Callable[[float], float]:
        a_resc = eta ** shift * alpha
        b_resc = eta ** shift * beta_val

        def v(y: float) -> float:
            s = sum(float(m.coeff) * y ** m.i * a_resc ** m.j
                    for m in prob.S_monomials)
            pv = sum(float(m.coeff) * y ** m.a * (eta * v_func(y)) ** m.b
                     * b_resc ** m.c * eta ** m.d
                     for m in prob.P_monomials)
            return s / eta ** (p + 2) + pv / eta
        return v

    # scalar fixed point alpha = eta^(L+1) lambda(v(alpha)); contraction in eta
    alpha = 0.0
    for _ in range(alpha_iters):
        lam = quad_lambda(rhs(alpha), eta, p, L, rel_tol)
        new = eta ** (L + 1) * lam
        if abs(new - alpha) <= 1e-15 * max(1.0, abs(new)):
            alpha = new
            break
        alpha = new
    v = rhs(alpha)
    lam = quad_lambda(v, eta, p, L, rel_tol)
    u = quad_I(v, eta, t_grid, p, L, rel_tol, lam=lam)
    return alpha, u


# ---------------------------------------------------------------------------
# residual of a truncated expansion in the original equation
# ---------------------------------------------------------------------------

def residual_pointwise(prob: ProblemSpec, res: ExpansionResult, eta: float,
                       t: float) -> float:
    """Defect of (alpha_K, u_K) in the rescaled equation at one point, with
    analytic derivatives throughout."""
    p, L = prob.p, prob.L
    table = prob.table()
    alpha = res.alpha_float(eta)
    a_resc = eta ** (p - L + 1) * alpha
    _, u = eval_series(res.u, table, t, eta)
    du = eval_series_deriv(res.u, table, t, eta)
    s_val = sum(float(m.coeff) * t ** m.i * a_resc ** m.j
                for m in prob.S_monomials)
    p_val = sum(float(m.coeff) * t ** m.a * (eta * u) ** m.b
                * a_resc ** m.c * eta ** m.d
                for m in prob.P_monomials)
    r = (eta ** (p + 2) * du - (p + 1) * eta * t ** p * u
         - a_resc * t ** L - s_val - eta ** (p + 1) * p_val)
    return abs(r)


def residual(prob: ProblemSpec, res: ExpansionResult, eta: float,
             grid: Sequence[float]) -> float:
    """Sup-norm of the pointwise defect over a t-grid."""
    return max(residual_pointwise(prob, res, eta, t) for t in grid)


def fit_loglog(etas: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of log(value) vs log(eta) and its r^2."""
    x = np.log(np.asarray(etas))
    y = np.log(np.asarray(values))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), r2


def order_sweep(prob: ProblemSpec, K: int, cfg: EvalConfig) -> ValidationReport:
    """Residual decay across the eta sweep, fitted as a log-log slope."""
    if len(cfg.eta_list) < 4:
        raise ValueError("order_sweep needs at least 4 eta values")
    rep = ValidationReport()
    res = expand(prob, K)
    grid = np.linspace(-prob.t1, prob.t1, cfg.grid_n)
    for eta in cfg.eta_list:
        rep.per_eta_residual[eta] = residual(prob, res, eta, grid)
    vals = [rep.per_eta_residual[e] for e in cfg.eta_list]
    if max(vals) < 1e-12:
        rep.add("residual-exact", max(vals), 1e-12)
        return rep
    slope, r2 = fit_loglog(cfg.eta_list, vals)
    if r2 >= 0.98:
        rep.slope, rep.slope_r2 = slope, r2
    else:
        rep.slope_r2 = r2
    rep.add(f"slope-order-{K}", slope, K + 1 - 0.3, larger_is_better=True)
    rep.add(f"slope-fit-r2-order-{K}", r2, 0.98, larger_is_better=True)
    return rep


# ---------------------------------------------------------------------------
# asymptotic-freeness / basis-recovery fit
# ---------------------------------------------------------------------------

def _basis_functions(K: int, table: PsiTable, slow_deg: int = 2):
    funcs = []
    for n in range(K + 1):
        for i in range(slow_deg + 1):
            funcs.append(("slow", n, i, None))
        for i in range(n + 1):
            for k in range(table.p):
                if k != table.L:
                    funcs.append(("fast", n, i, k))
    return funcs


def freeness_fit(K: int, p: int, L: int, cfg: EvalConfig,
                 rng: Optional[np.random.Generator] = None,
                 coeffs: Optional[np.ndarray] = None) -> tuple[float, float]:
    """Draw a random element of the order-K space, evaluate it on a (t, eta)
    sample, refit the coefficients by least squares and report
    (max coefficient error, condition number)."""
    table = get_table(p, L)
    rng = rng or np.random.default_rng(0)
    funcs = _basis_functions(K, table)
    ts = np.linspace(-cfg.t1, cfg.t1, 41)
    samples = [(t, eta) for eta in cfg.eta_list for t in ts]
    A = np.empty((len(samples), len(funcs)))
    for col, (kind, n, i, k) in enumerate(funcs):
        for row, (t, eta) in enumerate(samples):
            if kind == "slow":
                A[row, col] = t ** i * eta ** n
            else:
                A[row, col] = table.psi_bar(i, k, t / eta) * eta ** n
    if coeffs is None:
        coeffs = rng.uniform(-1.0, 1.0, len(funcs))
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    if cond >= 1e10:
        raise IllConditionedError(
            f"sample design matrix condition number {cond:.2e} >= 1e10")
    y = A @ coeffs
    fit, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(np.max(np.abs(fit - coeffs))), cond


# ---------------------------------------------------------------------------
# consolidated self-test
# ---------------------------------------------------------------------------

def selftest_suite(pairs: Sequence[tuple[int, int]] = ((3, 0), (3, 2), (5, 2)),
                   table_factory: Callable[[int, int], PsiTable] = None) -> ValidationReport:
    """Identity and oracle-equivalence checks across the core rules."""
    from .ieta import I_power, I_product
    rep = ValidationReport()
    factory = table_factory or get_table
    T_grid = np.linspace(-6, 6, 121)
    for p, L in pairs:
        table = factory(p, L)
        tag = f"p={p},L={L}"
        # psi_L vanishes, psi_p is constant
        worst = max(abs(table.psi(L, T)) for T in T_grid)
        rep.add(f"{tag} psi_L=0", worst, 1e-12)
        worst = max(abs(table.psi(p, T) + 1.0 / (p + 1)) for T in T_grid)
        rep.add(f"{tag} psi_p=-1/(p+1)", worst, 1e-12)
        # parity
        worst = max(abs(table.psi(k, -T) - (-1.0) ** (k + 1) * table.psi(k, T))
                    for k in range(p + 1) for T in np.linspace(0.1, 4, 9))
        rep.add(f"{tag} psi parity", worst, 1e-12)
        # analytic derivative vs central difference
        h = 1e-5
        worst = 0.0
        for k in range(p + 1):
            for T in np.linspace(-4, 4, 33):
                fd = (table.psi(k, T + h) - table.psi(k, T - h)) / (2 * h)
                worst = max(worst, abs(fd - table.psi_deriv(k, T)))
        rep.add(f"{tag} psi ODE relation", worst, 1e-7)
        # formal operator vs quadrature for the pure powers
        eta = 0.25
        ts = np.linspace(-0.8, 0.8, 5)
        for k in range(p + 1):
            series, _ = I_power(k, table, K=k + 2)
            got = np.array([eval_series(series, table, t, eta)[1] for t in ts])
            want = quad_I(lambda y, k=k: y ** k, eta, ts, p, L)
            scale = max(np.max(np.abs(want)), 1e-12)
            rep.add(f"{tag} I(y^{k}) vs quadrature",
                    float(np.max(np.abs(got - want)) / scale), 1e-7)
        # one nested-product rule per pair
        for (i, k) in [(1, 1), (0, 2)]:
            if k == L or k >= p:
                continue
            series, _ = I_product(i, k, table, K=i + k + 4)
            got = np.array([eval_series(series, table, t, eta)[1] for t in ts])
            vf = (lambda y, i=i, k=k:
                  y ** i * eta ** (k + 1) * table.psi(k, y / eta))
            want = quad_I(vf, eta, ts, p, L)
            scale = max(np.max(np.abs(want)), 1e-12)
            rep.add(f"{tag} I(y^{i} I(y^{k})) vs quadrature",
                    float(np.max(np.abs(got - want)) / scale), 1e-7)
        # moment closed form vs quadrature
        worst = 0.0
        tc = _EXP_CUT ** (1.0 / (p + 1))
        for k in range(p):
            for i in range(3):
                direct = _quad(
                    lambda T, i=i, k=k: T ** i * table.psi(k, T)
                    * math.exp(-T ** (p + 1)), -tc, tc, 1e-12)
                m = table.moment(i, k).to_float()
                worst = max(worst, abs(direct - m))
        rep.add(f"{tag} moment closed form", worst, 1e-8)
        # leading tail coefficient
        worst = 0.0
        for k in range(p):
            if k == L:
                continue
            # odd k has no t^L source term, so its tail starts at p - k
            n0 = p - max(k, L) if k % 2 == 0 else p - k
            lead = table.rho_float(k, n0)
            got = 30.0 ** n0 * table.psi(k, 30.0)
            worst = max(worst, abs(got / lead - 1.0))
        rep.add(f"{tag} tail leading coefficient", worst, 1e-3)
    return rep
