"""Quantifier-free assertions over Int, Bool and finite sorts.

Terms and formulas are immutable trees. ``evaluate_formula`` is the plain
recursive semantics; the solvers never call it, so it serves as the
reference every returned model is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Union


class UnboundSymbol(KeyError):
    """The assignment does not cover a variable or function cell."""


# ---------------------------------------------------------------------------
# sorts


@dataclass(frozen=True)
class IntSort:
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class BoolSort:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class FiniteSort:
    name: str
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError(f"finite sort {self.name} has no members")
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"finite sort {self.name} has duplicate members")

    def __str__(self) -> str:
        return self.name


INT = IntSort()
BOOL = BoolSort()
Sort = Union[IntSort, BoolSort, FiniteSort]


# ---------------------------------------------------------------------------
# terms


class Term:
    """Base class; arithmetic operators build linear terms."""

    sort: Sort

    def __add__(self, other: Term | int) -> Term:
        return Add((self, lift(other)))

    def __radd__(self, other: int) -> Term:
        return Add((lift(other), self))

    def __sub__(self, other: Term | int) -> Term:
        return Sub(self, lift(other))

    def __rsub__(self, other: int) -> Term:
        return Sub(lift(other), self)

    def __mul__(self, other: int) -> Term:
        if not isinstance(other, int):
            raise TypeError("only multiplication by integer constants is linear")
        return Mul(other, self)

    __rmul__ = __mul__


@dataclass(frozen=True)
class IntConst(Term):
    value: int
    sort: Sort = field(default=INT, init=False, repr=False)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: Sort = INT

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Member(Term):
    """A constant of a finite sort, e.g. the party ``Bank``."""

    name: str
    sort: FiniteSort

    def __post_init__(self) -> None:
        if self.name not in self.sort.members:
            raise ValueError(f"{self.name} is not a member of {self.sort.name}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FunApp(Term):
    fn: str
    arg: Term
    sort: FiniteSort

    def __str__(self) -> str:
        return f"{self.fn}({self.arg})"


@dataclass(frozen=True)
class Add(Term):
    args: tuple[Term, ...]
    sort: Sort = field(default=INT, init=False, repr=False)

    def __str__(self) -> str:
        return "(" + " + ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term
    sort: Sort = field(default=INT, init=False, repr=False)

    def __str__(self) -> str:
        return f"({self.left} - {self.right})"


@dataclass(frozen=True)
class Mul(Term):
    coef: int
    arg: Term
    sort: Sort = field(default=INT, init=False, repr=False)

    def __str__(self) -> str:
        return f"{self.coef}*{self.arg}"


@dataclass(frozen=True)
class Ite(Term):
    cond: Formula
    then: Term
    orelse: Term

    @property
    def sort(self) -> Sort:  # type: ignore[override]
        return self.then.sort

    def __str__(self) -> str:
        return f"ite({self.cond}, {self.then}, {self.orelse})"


def lift(x: Term | int) -> Term:
    return IntConst(x) if isinstance(x, int) else x


# ---------------------------------------------------------------------------
# formulas


class Formula:
    pass


@dataclass(frozen=True)
class BoolConst(Formula):
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Cmp(Formula):
    """Binary comparison; ``op`` is one of ``= <= < >= >``."""

    op: str
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        if not self.args:
            return "true"
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        if not self.args:
            return "false"
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"!{self.arg}"


@dataclass(frozen=True)
class Implies(Formula):
    premise: Formula
    conclusion: Formula

    def __str__(self) -> str:
        return f"({self.premise} => {self.conclusion})"


TRUE = BoolConst(True)
FALSE = BoolConst(False)

CMP_OPS = ("=", "<=", "<", ">=", ">")


def _cmp(op: str, a: Term | int, b: Term | int) -> Cmp:
    a, b = lift(a), lift(b)
    if op != "=" and (a.sort != INT or b.sort != INT):
        raise TypeError(f"ordering comparison on non-integer terms {a}, {b}")
    if a.sort != b.sort:
        raise TypeError(f"comparison between sorts {a.sort} and {b.sort}")
    return Cmp(op, a, b)


def eq(a: Term | int, b: Term | int) -> Cmp:
    return _cmp("=", a, b)


def le(a: Term | int, b: Term | int) -> Cmp:
    return _cmp("<=", a, b)


def lt(a: Term | int, b: Term | int) -> Cmp:
    return _cmp("<", a, b)


def ge(a: Term | int, b: Term | int) -> Cmp:
    return _cmp(">=", a, b)


def gt(a: Term | int, b: Term | int) -> Cmp:
    return _cmp(">", a, b)


def conj(*args: Formula) -> Formula:
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*args: Formula) -> Formula:
    return args[0] if len(args) == 1 else Or(tuple(args))


def implies(a: Formula, b: Formula) -> Implies:
    return Implies(a, b)


def neg(a: Formula) -> Not:
    return Not(a)


# ---------------------------------------------------------------------------
# symbols and traversal


def children(node: Term | Formula) -> tuple:
    if isinstance(node, (Add, And, Or)):
        return node.args
    if isinstance(node, (Sub,)):
        return (node.left, node.right)
    if isinstance(node, Cmp):
        return (node.left, node.right)
    if isinstance(node, Mul):
        return (node.arg,)
    if isinstance(node, FunApp):
        return (node.arg,)
    if isinstance(node, Ite):
        return (node.cond, node.then, node.orelse)
    if isinstance(node, Not):
        return (node.arg,)
    if isinstance(node, Implies):
        return (node.premise, node.conclusion)
    return ()


def walk(node: Term | Formula) -> Iterator[Term | Formula]:
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def free_vars(node: Term | Formula) -> set[str]:
    return {n.name for n in walk(node) if isinstance(n, Var)}


def functions_used(node: Term | Formula) -> set[str]:
    return {n.fn for n in walk(node) if isinstance(n, FunApp)}


# ---------------------------------------------------------------------------
# assertion sets


@dataclass(frozen=True)
class Assertion:
    name: str
    formula: Formula
    block_id: str | None = None


@dataclass(frozen=True)
class VarDomain:
    """Integer bounds (inclusive) or a finite sort; ``hints`` seed the search."""

    sort: Sort = INT
    lo: int | None = None
    hi: int | None = None
    hints: tuple[int, ...] = ()

    def values(self) -> Iterable[int | str]:
        if isinstance(self.sort, FiniteSort):
            return self.sort.members
        assert self.lo is not None and self.hi is not None
        return range(self.lo, self.hi + 1)

    def contains(self, value: int | str) -> bool:
        if isinstance(self.sort, FiniteSort):
            return value in self.sort.members
        return isinstance(value, int) and self.lo <= value <= self.hi  # type: ignore[operator]


def day_domain(horizon: int) -> VarDomain:
    """Days after signing, with -1 meaning "not performed"."""
    return VarDomain(INT, -1, horizon)


@dataclass(frozen=True)
class FunctionDecl:
    domain: FiniteSort
    codomain: FiniteSort


@dataclass
class AssertionSet:
    hard: list[Assertion] = field(default_factory=list)
    soft: list[Assertion] = field(default_factory=list)
    var_domains: dict[str, VarDomain] = field(default_factory=dict)
    functions: dict[str, FunctionDecl] = field(default_factory=dict)

    def names(self) -> list[str]:
        return [a.name for a in self.hard] + [a.name for a in self.soft]

    def hard_named(self, name: str) -> Assertion:
        for a in self.hard:
            if a.name == name:
                return a
        raise KeyError(name)

    def lookup(self, name: str) -> Assertion:
        for a in (*self.hard, *self.soft):
            if a.name == name:
                return a
        raise KeyError(name)

    def restrict(self, names: Iterable[str]) -> AssertionSet:
        """Copy keeping only the named hard assertions and no soft ones."""
        keep = set(names)
        unknown = keep - {a.name for a in self.hard}
        if unknown:
            raise KeyError(f"unknown hard assertions: {sorted(unknown)}")
        return replace(self, hard=[a for a in self.hard if a.name in keep], soft=[])

    def with_hard(self, *extra: Assertion) -> AssertionSet:
        return replace(self, hard=[*self.hard, *extra])

    def check(self) -> None:
        """Raise ValueError unless names are unique and every symbol is declared."""
        names = self.names()
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate assertion names: {dupes}")
        for a in (*self.hard, *self.soft):
            missing = free_vars(a.formula) - set(self.var_domains)
            if missing:
                raise ValueError(f"{a.name}: undeclared variables {sorted(missing)}")
            missing = functions_used(a.formula) - set(self.functions)
            if missing:
                raise ValueError(f"{a.name}: undeclared functions {sorted(missing)}")


# ---------------------------------------------------------------------------
# assignments and evaluation


@dataclass
class Assignment:
    values: dict[str, int | str] = field(default_factory=dict)
    tables: dict[str, dict[str, str]] = field(default_factory=dict)

    def __getitem__(self, name: str) -> int | str:
        return self.values[name]

    def flat(self) -> dict[str, int | str]:
        """Variables followed by function cells as ``fn(arg)`` keys."""
        out: dict[str, int | str] = dict(self.values)
        for fn, table in self.tables.items():
            for arg, value in table.items():
                out[f"{fn}({arg})"] = value
        return out


def evaluate_term(t: Term, a: Assignment) -> int | str:
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, Member):
        return t.name
    if isinstance(t, Var):
        if t.name not in a.values:
            raise UnboundSymbol(t.name)
        return a.values[t.name]
    if isinstance(t, FunApp):
        arg = evaluate_term(t.arg, a)
        try:
            return a.tables[t.fn][arg]  # type: ignore[index]
        except KeyError:
            raise UnboundSymbol(f"{t.fn}({arg})") from None
    if isinstance(t, Add):
        return sum(evaluate_term(x, a) for x in t.args)  # type: ignore[misc]
    if isinstance(t, Sub):
        return evaluate_term(t.left, a) - evaluate_term(t.right, a)  # type: ignore[operator]
    if isinstance(t, Mul):
        return t.coef * evaluate_term(t.arg, a)  # type: ignore[operator]
    if isinstance(t, Ite):
        return evaluate_term(t.then if evaluate_formula(t.cond, a) else t.orelse, a)
    raise TypeError(f"not a term: {t!r}")


def evaluate_formula(f: Formula, a: Assignment) -> bool:
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Cmp):
        x, y = evaluate_term(f.left, a), evaluate_term(f.right, a)
        if f.op == "=":
            return x == y
        if f.op == "<=":
            return x <= y  # type: ignore[operator]
        if f.op == "<":
            return x < y  # type: ignore[operator]
        if f.op == ">=":
            return x >= y  # type: ignore[operator]
        return x > y  # type: ignore[operator]
    if isinstance(f, And):
        # evaluate every argument so an unbound symbol is never masked
        return all([evaluate_formula(g, a) for g in f.args])
    if isinstance(f, Or):
        return any([evaluate_formula(g, a) for g in f.args])
    if isinstance(f, Not):
        return not evaluate_formula(f.arg, a)
    if isinstance(f, Implies):
        p = evaluate_formula(f.premise, a)
        c = evaluate_formula(f.conclusion, a)
        return (not p) or c
    raise TypeError(f"not a formula: {f!r}")
