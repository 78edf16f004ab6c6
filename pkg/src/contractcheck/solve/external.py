"""Drive an external SMT-LIB2 solver as a child process.

The script is written to the solver's stdin up to ``(check-sat)``; the
answer line decides whether ``(get-model)`` or ``(get-unsat-core)`` is sent
next. Soft constraints are maximized by a linear search over the number of
satisfied soft assertions, expressed as a plain cardinality assertion, so
no solver extension is needed.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import replace

from ..logic import Add, Assertion, AssertionSet, Assignment, FiniteSort, IntConst, Ite, evaluate_formula, ge
from .bounded import minimize_core
from .result import Sat, SolverProtocolError, SolverUnavailable, SolveResult, Unsat
from .smtlib import SExpr, SExprError, emit_smtlib, parse_sexprs

DEFAULT_TIMEOUT = 60.0


def _check(cmd: str, s: AssertionSet, timeout: float) -> tuple[str, list[SExpr]]:
    """Run one query; returns ("sat", model) or ("unsat", core)."""
    try:
        argv = shlex.split(cmd)
    except ValueError as exc:
        raise SolverUnavailable(f"cannot parse solver command {cmd!r}: {exc}") from None
    if not argv:
        raise SolverUnavailable("empty solver command")
    try:
        proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as exc:
        raise SolverUnavailable(f"cannot start {argv[0]}: {exc}") from None

    with proc:
        try:
            assert proc.stdin is not None and proc.stdout is not None
            proc.stdin.write(emit_smtlib(s, queries=False))
            proc.stdin.flush()
            answer = proc.stdout.readline().strip()
            if answer == "sat":
                follow = "(get-model)\n(exit)\n"
            elif answer == "unsat":
                follow = "(get-unsat-core)\n(exit)\n"
            else:
                rest, _ = proc.communicate("(exit)\n", timeout=timeout)
                raise SolverProtocolError(f"unexpected answer {answer!r}", answer + "\n" + rest)
            rest, _ = proc.communicate(follow, timeout=timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            raise SolverProtocolError(f"solver did not answer within {timeout}s") from None
        except BrokenPipeError:
            raise SolverProtocolError("solver closed its input", proc.stdout.read() if proc.stdout else "") from None
    try:
        body = parse_sexprs(rest)
    except SExprError as exc:
        raise SolverProtocolError(f"unreadable output: {exc}", rest) from None
    if any(isinstance(x, list) and x and x[0] == "error" for x in body):
        raise SolverProtocolError("solver reported an error", rest)
    if not body or not isinstance(body[0], list):
        raise SolverProtocolError("missing model or core", rest)
    return answer, body[0]


def _literal(x: SExpr) -> int | str:
    if isinstance(x, list):
        if len(x) == 2 and x[0] == "-":
            return -int(_literal(x[1]))  # type: ignore[arg-type]
        if len(x) == 3 and x[0] == "as":
            return _literal(x[1])
        raise SolverProtocolError(f"unsupported model value {x!r}")
    try:
        return int(x)
    except ValueError:
        return x


def _eval_body(x: SExpr, env: dict[str, str]) -> int | str | bool:
    """Evaluate the ite/=-shaped function bodies solvers print in models."""
    if isinstance(x, str):
        if x in env:
            return env[x]
        if x in ("true", "false"):
            return x == "true"
        return _literal(x)
    head, *args = x
    if head == "ite":
        return _eval_body(args[1] if _eval_body(args[0], env) else args[2], env)
    if head == "=":
        return _eval_body(args[0], env) == _eval_body(args[1], env)
    if head == "and":
        return all(_eval_body(a, env) for a in args)
    if head == "or":
        return any(_eval_body(a, env) for a in args)
    if head == "not":
        return not _eval_body(args[0], env)
    if head == "let":
        inner = dict(env)
        for name, value in args[0]:
            inner[name] = _eval_body(value, env)  # type: ignore[assignment]
        return _eval_body(args[1], inner)
    return _literal(x)


def parse_model(model: list[SExpr], s: AssertionSet) -> Assignment:
    entries = model[1:] if model and model[0] == "model" else model
    defs: dict[str, tuple[list, SExpr]] = {}
    for entry in entries:
        if isinstance(entry, list) and len(entry) == 5 and entry[0] == "define-fun":
            _, name, params, _sort, body = entry
            defs[name] = (params, body)  # type: ignore[index]

    values: dict[str, int | str] = {}
    for var, dom in s.var_domains.items():
        if var in defs:
            values[var] = _eval_body(defs[var][1], {})  # type: ignore[assignment]
        else:
            # unconstrained variable the solver chose not to print
            values[var] = dom.sort.members[0] if isinstance(dom.sort, FiniteSort) else dom.lo  # type: ignore[assignment]
    tables: dict[str, dict[str, str]] = {}
    for fn, decl in s.functions.items():
        table = {}
        for member in decl.domain.members:
            if fn in defs:
                params, body = defs[fn]
                env = {params[0][0]: member} if params else {}
                table[member] = str(_eval_body(body, env))
            else:
                table[member] = decl.codomain.members[0]
        tables[fn] = table
    return Assignment(values, tables)


def _is_sat(cmd: str, timeout: float):
    def check(s: AssertionSet) -> bool:
        return _check(cmd, s, timeout)[0] == "sat"

    return check


def run_external(
    solver_command: str,
    s: AssertionSet,
    *,
    maximize: bool = False,
    timeout: float = DEFAULT_TIMEOUT,
) -> SolveResult:
    """Decide ``s`` with an external solver.

    Returned cores are shrunk to 1-minimal by deletion, each step being
    another solver call. Model values are taken as reported, even outside
    the built-in candidate domains.
    """
    s.check()
    answer, payload = _check(solver_command, s, timeout)
    if answer == "unsat":
        reported = [x for x in payload if isinstance(x, str)]
        core = minimize_core(s, reported, is_sat=_is_sat(solver_command, timeout))
        return Unsat(core)
    model = parse_model(payload, s)
    if maximize and s.soft:
        for need in range(len(s.soft), 0, -1):
            counted = _at_least(s, need)
            answer, payload = _check(solver_command, counted, timeout)
            if answer == "sat":
                model = parse_model(payload, s)
                break
    satisfied = [a.name for a in s.soft if evaluate_formula(a.formula, model)]
    return Sat(model, satisfied)


def _at_least(s: AssertionSet, need: int) -> AssertionSet:
    """Copy of ``s`` that also demands at least ``need`` soft assertions hold."""
    count = Add(tuple(Ite(a.formula, IntConst(1), IntConst(0)) for a in s.soft))
    return replace(s, hard=[*s.hard, Assertion("card.soft", ge(count, need))], soft=[])
