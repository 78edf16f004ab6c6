"""Decision procedures: the built-in bounded solver and an external driver."""

from .bounded import DEFAULT_LIMIT, CandidateDomains, is_satisfiable, maximize_soft, minimize_core, solve_bounded
from .external import run_external
from .result import NotUnsat, ResourceLimit, Sat, SolverProtocolError, SolverUnavailable, SolveResult, Unsat
from .smtlib import emit_smtlib

__all__ = [
    "DEFAULT_LIMIT",
    "CandidateDomains",
    "NotUnsat",
    "ResourceLimit",
    "Sat",
    "SolveResult",
    "SolverProtocolError",
    "SolverUnavailable",
    "Unsat",
    "emit_smtlib",
    "is_satisfiable",
    "maximize_soft",
    "minimize_core",
    "run_external",
    "solve_bounded",
]
