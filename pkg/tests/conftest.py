"""Shared fixtures and the acceptance-summary reporting hook."""

import json

import pytest

from canardexp.engine import make_problem
from canardexp.psi import get_table

PAIRS = [(3, 0), (3, 2), (5, 2)]

_acceptance_lines = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.line(line)


@pytest.fixture(params=PAIRS, ids=lambda pl: f"p{pl[0]}L{pl[1]}")
def table(request):
    return get_table(*request.param)


@pytest.fixture
def toy_problem():
    # constant forcing only; solved exactly by alpha = -1, u = 0
    return make_problem(3, 0, 1.0, 0.8, S=(), P=[(0, 0, 0, 0, 1)])


@pytest.fixture
def linear_problem():
    # P = t; solution u = psi_bar_{0,1} eta, alpha = 0
    return make_problem(3, 0, 1.0, 0.8, S=(), P=[(1, 0, 0, 0, 1)])


@pytest.fixture
def bench_problem():
    # S = t^6 alpha, P = 1 + (1/2) t U; corrections enter at orders 3 and 6
    return make_problem(3, 0, 1.0, 0.8,
                        S=[(6, 1, 1)],
                        P=[(0, 0, 0, 0, 1), (1, 1, 0, 0, "1/2")])


@pytest.fixture
def problem_file(tmp_path):
    def write(doc: dict, name: str = "problem.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write


TOY_DOC = {"p": 3, "L": 0, "t0": 1.0, "t1": 0.8, "S": [],
           "P": [{"a": 0, "b": 0, "c": 0, "d": 0, "coeff": "1"}]}

LINEAR_DOC = {"p": 3, "L": 0, "t0": 1.0, "t1": 0.8, "S": [],
              "P": [{"a": 1, "b": 0, "c": 0, "d": 0, "coeff": "1"}]}

BENCH_DOC = {"p": 3, "L": 0, "t0": 1.0, "t1": 0.8,
             "S": [{"i": 6, "j": 1, "coeff": "1"}],
             "P": [{"a": 0, "b": 0, "c": 0, "d": 0, "coeff": "1"},
                   {"a": 1, "b": 1, "c": 0, "d": 0, "coeff": "1/2"}]}
