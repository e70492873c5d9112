"""Problem and expansion file formats (JSON).

The symbolic coefficient rendering is authoritative for round-trips; the float
rendering is advisory.  Unknown keys are rejected so that typos in problem
files fail loudly.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any

from . import __version__
from .algebra import FormalSeries, SeriesElement
from .engine import AlphaSeries, ExpansionResult, ProblemSpec, make_problem
from .exact import ExactConst


class ProblemFileError(ValueError):
    """Problem file failed to parse or validate; message names the field."""


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ProblemFileError(f"unknown key(s) {sorted(extra)} in {where}")


def _coeff(value: Any, where: str) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemFileError(f"bad coefficient {value!r} in {where}: {exc}")


def problem_from_dict(doc: dict) -> ProblemSpec:
    if not isinstance(doc, dict):
        raise ProblemFileError("problem document must be a JSON object")
    _check_keys(doc, {"p", "L", "t0", "t1", "S", "P"}, "problem")
    for key in ("p", "L", "t0", "t1"):
        if key not in doc:
            raise ProblemFileError(f"missing required key {key!r}")
    S = []
    for idx, m in enumerate(doc.get("S", [])):
        where = f"S[{idx}]"
        _check_keys(m, {"i", "j", "coeff"}, where)
        S.append((int(m["i"]), int(m["j"]), _coeff(m["coeff"], where)))
    P = []
    for idx, m in enumerate(doc.get("P", [])):
        where = f"P[{idx}]"
        _check_keys(m, {"a", "b", "c", "d", "coeff"}, where)
        P.append((int(m.get("a", 0)), int(m.get("b", 0)), int(m.get("c", 0)),
                  int(m.get("d", 0)), _coeff(m["coeff"], where)))
    try:
        return make_problem(doc["p"], doc["L"], doc["t0"], doc["t1"], S, P)
    except ValueError as exc:
        raise ProblemFileError(str(exc))


def load_problem(path: str) -> ProblemSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"{path}: invalid JSON: {exc}")
    return problem_from_dict(doc)


def problem_to_dict(prob: ProblemSpec) -> dict:
    return {
        "p": prob.p,
        "L": prob.L,
        "t0": prob.t0,
        "t1": prob.t1,
        "S": [{"i": m.i, "j": m.j, "coeff": str(m.coeff)}
              for m in prob.S_monomials],
        "P": [{"a": m.a, "b": m.b, "c": m.c, "d": m.d, "coeff": str(m.coeff)}
              for m in prob.P_monomials],
    }


def problem_hash(prob: ProblemSpec) -> str:
    blob = json.dumps(problem_to_dict(prob), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _const_entry(c: ExactConst) -> dict:
    return {"symbolic": c.render(), "float": c.to_float()}


def expansion_to_dict(res: ExpansionResult) -> dict:
    orders = []
    for n in range(res.order + 1):
        a_n = res.alpha.get(n, ExactConst())
        el = res.u.elements.get(n)
        slow = [] if el is None else [
            {"i": i, "coeff": _const_entry(c)} for i, c in sorted(el.slow.items())]
        fast = [] if el is None else [
            {"i": i, "k": k, "coeff": _const_entry(c)}
            for (i, k), c in sorted(el.fast.items())]
        if a_n.is_zero and not slow and not fast:
            continue
        orders.append({"n": n, "a_n": _const_entry(a_n), "slow": slow, "fast": fast})
    return {
        "problem_hash": problem_hash(res.problem),
        "problem": problem_to_dict(res.problem),
        "order": res.order,
        "tool_version": __version__,
        "iterations_used": res.iterations_used,
        "orders": orders,
    }


def write_expansion(res: ExpansionResult, path: str) -> dict:
    doc = expansion_to_dict(res)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc


def expansion_from_dict(doc: dict) -> ExpansionResult:
    prob = problem_from_dict(doc["problem"])
    K = int(doc["order"])
    alpha: AlphaSeries = {}
    series = FormalSeries(K)
    for rec in doc["orders"]:
        n = int(rec["n"])
        a_n = ExactConst.parse(rec["a_n"]["symbolic"])
        if not a_n.is_zero:
            alpha[n] = a_n
        el = SeriesElement(n)
        for s in rec["slow"]:
            el.slow[int(s["i"])] = ExactConst.parse(s["coeff"]["symbolic"])
        for f in rec["fast"]:
            el.fast[(int(f["i"]), int(f["k"]))] = ExactConst.parse(
                f["coeff"]["symbolic"])
        if not el.prune().is_zero:
            series.elements[n] = el
    return ExpansionResult(alpha, series, K, int(doc.get("iterations_used", 0)),
                           prob)


def load_expansion(path: str) -> ExpansionResult:
    with open(path) as fh:
        return expansion_from_dict(json.load(fh))
