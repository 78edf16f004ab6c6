"""SMT-LIB2 (v2.6) emission and a small s-expression reader."""

from __future__ import annotations

import re
from typing import Union

from ..logic import (
    Add,
    And,
    AssertionSet,
    BoolConst,
    Cmp,
    FiniteSort,
    Formula,
    FunApp,
    Implies,
    IntConst,
    Ite,
    Member,
    Mul,
    Not,
    Or,
    Sub,
    Term,
    Var,
)

SExpr = Union[str, list]

_SIMPLE = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*\Z")
_RESERVED = {
    "true", "false", "not", "and", "or", "=>", "ite", "let", "distinct",
    "Int", "Bool", "par", "_", "!", "as", "forall", "exists", "match",
}


def symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    return "|" + name + "|"


def _int(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def term_to_smt(t: Term) -> str:
    if isinstance(t, IntConst):
        return _int(t.value)
    if isinstance(t, (Var, Member)):
        return symbol(t.name)
    if isinstance(t, FunApp):
        return f"({symbol(t.fn)} {term_to_smt(t.arg)})"
    if isinstance(t, Add):
        return "(+ " + " ".join(term_to_smt(a) for a in t.args) + ")" if t.args else "0"
    if isinstance(t, Sub):
        return f"(- {term_to_smt(t.left)} {term_to_smt(t.right)})"
    if isinstance(t, Mul):
        return f"(* {_int(t.coef)} {term_to_smt(t.arg)})"
    if isinstance(t, Ite):
        return f"(ite {formula_to_smt(t.cond)} {term_to_smt(t.then)} {term_to_smt(t.orelse)})"
    raise TypeError(f"cannot emit term {t!r}")


def formula_to_smt(f: Formula) -> str:
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        return f"({f.op} {term_to_smt(f.left)} {term_to_smt(f.right)})"
    if isinstance(f, And):
        if not f.args:
            return "true"
        return "(and " + " ".join(formula_to_smt(g) for g in f.args) + ")"
    if isinstance(f, Or):
        if not f.args:
            return "false"
        return "(or " + " ".join(formula_to_smt(g) for g in f.args) + ")"
    if isinstance(f, Not):
        return f"(not {formula_to_smt(f.arg)})"
    if isinstance(f, Implies):
        return f"(=> {formula_to_smt(f.premise)} {formula_to_smt(f.conclusion)})"
    raise TypeError(f"cannot emit formula {f!r}")


def _sorts(s: AssertionSet) -> list[FiniteSort]:
    seen: dict[str, FiniteSort] = {}
    for decl in s.functions.values():
        seen.setdefault(decl.domain.name, decl.domain)
        seen.setdefault(decl.codomain.name, decl.codomain)
    for dom in s.var_domains.values():
        if isinstance(dom.sort, FiniteSort):
            seen.setdefault(dom.sort.name, dom.sort)
    return list(seen.values())


def declarations(s: AssertionSet) -> list[str]:
    lines = []
    for sort in _sorts(s):
        ctors = " ".join(f"({symbol(m)})" for m in sort.members)
        lines.append(f"(declare-datatype {symbol(sort.name)} ({ctors}))")
    for fn, decl in s.functions.items():
        lines.append(f"(declare-fun {symbol(fn)} ({symbol(decl.domain.name)}) {symbol(decl.codomain.name)})")
    for var, dom in s.var_domains.items():
        sort = symbol(dom.sort.name) if isinstance(dom.sort, FiniteSort) else "Int"
        lines.append(f"(declare-const {symbol(var)} {sort})")
    return lines


def emit_smtlib(s: AssertionSet, *, soft_mode: str = "comment", queries: bool = True) -> str:
    """Render ``s`` as a complete SMT-LIB2 script.

    Hard assertions carry ``:named`` labels so a solver can report cores.
    Soft assertions are emitted as comments followed by a commented
    ``(assert-soft ...)`` line; ``soft_mode="assert-soft"`` emits that line
    live for solvers that support the extension (e.g. z3). With
    ``queries=False`` the script stops after ``(check-sat)``.
    """
    if soft_mode not in ("comment", "assert-soft"):
        raise ValueError(f"unknown soft_mode {soft_mode!r}")
    out = ["(set-option :produce-unsat-cores true)", "; declarations"]
    decls = declarations(s)
    out += decls
    if s.hard:
        out.append("; hard assertions")
    for a in s.hard:
        origin = f" ; block {a.block_id}" if a.block_id else ""
        out.append(f"(assert (! {formula_to_smt(a.formula)} :named {symbol(a.name)})){origin}")
    if s.soft:
        out.append("; soft assertions: maximize the number satisfied")
    for a in s.soft:
        line = f"(assert-soft {formula_to_smt(a.formula)} :weight 1 :id soft)"
        out.append(f"; {a.name}")
        out.append(line if soft_mode == "assert-soft" else f";{line}")
    out.append("(check-sat)")
    if queries:
        if decls:
            out.append("(get-model)")
        if s.hard:
            out.append("(get-unsat-core)")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# reading


_TOKEN = re.compile(r'\s+|;[^\n]*|(\()|(\))|(\|[^|]*\|)|("(?:[^"]|"")*")|([^\s()|";]+)')


class SExprError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SExprError(f"bad character at offset {pos}: {text[pos]!r}")
        pos = m.end()
        tok = next((g for g in m.groups() if g is not None), None)
        if tok is not None:
            tokens.append(tok)
    return tokens


def parse_sexprs(text: str) -> list[SExpr]:
    """Parse every top-level s-expression. Quoted ``|sym|`` lose their bars."""
    stack: list[list] = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SExprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok[1:-1] if tok.startswith("|") else tok)
    if len(stack) != 1:
        raise SExprError("unbalanced '('")
    return stack[0]
