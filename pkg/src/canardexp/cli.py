"""Command-line surface: expand / eval / validate / psi / selftest.

Exit codes: 0 success, 1 validation failure, 2 input error.  CSV output uses
newline line endings, '.' decimal separators and 17 significant digits.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .algebra import eval_series
from .engine import NoStabilizationError, expand, max_order_cap
from .fileio import ProblemFileError, load_problem, write_expansion
from .validate import (EvalConfig, ValidationReport, residual_pointwise,
                       selftest_suite)


def _fmt(x: float) -> str:
    return format(x, ".17g")


class CliInputError(Exception):
    pass


def _check_order(K: int) -> None:
    cap = max_order_cap()
    if K < 0:
        raise CliInputError("order must be nonnegative")
    if K > cap:
        raise CliInputError(
            f"order {K} exceeds CANARD_MAX_ORDER cap ({cap})")


def cmd_expand(args) -> int:
    _check_order(args.order)
    prob = load_problem(args.problem)
    res = expand(prob, args.order)
    write_expansion(res, args.out)
    for n in range(args.order + 1):
        el = res.u.elements.get(n)
        n_slow = len(el.slow) if el else 0
        n_fast = len(el.fast) if el else 0
        has_a = int(n in res.alpha)
        print(f"order {n}: alpha_terms={has_a} slow_terms={n_slow} "
              f"fast_terms={n_fast}")
    print(f"wrote {args.out} (iterations={res.iterations_used})")
    return 0


def cmd_eval(args) -> int:
    _check_order(args.order)
    if args.eta <= 0:
        raise CliInputError("--eta must be positive")
    if args.grid < 1 or args.grid % 2 == 0:
        raise CliInputError("--grid must be a positive odd integer")
    prob = load_problem(args.problem)
    res = expand(prob, args.order)
    table = prob.table()
    ts = np.linspace(-prob.t1, prob.t1, args.grid)
    alpha = res.alpha_float(args.eta)
    lines = ["t,T,alpha,u,residual"]
    for t in ts:
        _, u = eval_series(res.u, table, t, args.eta)
        r = residual_pointwise(prob, res, args.eta, t)
        lines.append(",".join(
            _fmt(v) for v in (t, t / args.eta, alpha, u, r)))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    _check_order(args.order)
    etas = tuple(float(x) for x in args.etas.split(","))
    if len(etas) < 4:
        raise CliInputError("--etas needs at least 4 values")
    prob = load_problem(args.problem)
    try:
        cfg = EvalConfig(eta_list=etas, t1=prob.t1)
    except ValueError as exc:
        raise CliInputError(str(exc))
    from .validate import order_sweep
    rep = order_sweep(prob, args.order, cfg)
    print(rep.render())
    return 0 if rep.passed else 1


def cmd_psi(args) -> int:
    from .psi import get_table
    try:
        table = get_table(args.p, args.L)
    except ValueError as exc:
        raise CliInputError(str(exc))
    if not 0 <= args.k <= args.p:
        raise CliInputError(f"--k must be in 0..p, got {args.k}")
    if args.step <= 0 or args.tmax < args.tmin:
        raise CliInputError("need --step > 0 and --tmax >= --tmin")
    lines = ["T,psi,psi_deriv"]
    T = args.tmin
    while T <= args.tmax + 1e-12:
        lines.append(",".join(_fmt(v) for v in
                              (T, table.psi(args.k, T),
                               table.psi_deriv(args.k, T))))
        T += args.step
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_selftest(args) -> int:
    rep: ValidationReport = selftest_suite()
    print(rep.render())
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="canardexp",
        description="Asymptotic expansions of canard solutions near a "
                    "degenerate turning point")
    sub = ap.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("expand", help="compute an expansion file")
    p_exp.add_argument("--problem", required=True)
    p_exp.add_argument("--order", type=int, required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(func=cmd_expand)

    p_ev = sub.add_parser("eval", help="evaluate an expansion on a grid")
    p_ev.add_argument("--problem", required=True)
    p_ev.add_argument("--order", type=int, required=True)
    p_ev.add_argument("--eta", type=float, required=True)
    p_ev.add_argument("--grid", type=int, default=101)
    p_ev.add_argument("--out", default=None)
    p_ev.set_defaults(func=cmd_eval)

    p_val = sub.add_parser("validate", help="run the residual order sweep")
    p_val.add_argument("--problem", required=True)
    p_val.add_argument("--order", type=int, required=True)
    p_val.add_argument("--etas", default="0.4,0.3,0.2,0.15,0.1")
    p_val.set_defaults(func=cmd_validate)

    p_psi = sub.add_parser("psi", help="tabulate a boundary-layer function")
    p_psi.add_argument("--p", type=int, required=True)
    p_psi.add_argument("--L", type=int, required=True)
    p_psi.add_argument("--k", type=int, required=True)
    p_psi.add_argument("--tmin", type=float, required=True)
    p_psi.add_argument("--tmax", type=float, required=True)
    p_psi.add_argument("--step", type=float, required=True)
    p_psi.set_defaults(func=cmd_psi)

    p_st = sub.add_parser("selftest", help="run the identity/oracle suite")
    p_st.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (CliInputError, ProblemFileError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoStabilizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
