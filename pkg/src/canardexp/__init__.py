"""Asymptotic expansions of canard solutions near a degenerate turning point."""

__version__ = "0.1.0"

from .engine import ExpansionResult, ProblemSpec, expand, make_problem  # noqa: F401
from .exact import ExactConst  # noqa: F401
from .psi import PsiTable, get_table  # noqa: F401
