"""Exhaustive finite-model search with soft maximization and core minimization.

Search runs depth-first: function cells first, then variables in
declaration order. Every assertion is compiled to a three-valued
(True/False/unknown) closure and re-checked whenever one of its symbols is
bound, so partial assignments are pruned as soon as they falsify anything.
Independent assertions (no shared symbols) are searched separately.

Integer variables range over ``CandidateDomains``: the constants of the
problem closed under pairwise sums and differences, widened by one either
side. Whenever every other variable of a linear atom is already bound, the
boundary value of that atom is added as well, so dependent quantities such
as a compensation amount are computed rather than enumerated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Sequence

from ..logic import (
    Add,
    AssertionSet,
    Assignment,
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
    And,
    Sub,
    Term,
    Var,
    walk,
)
from .result import NotUnsat, ResourceLimit, Sat, SolveResult, Unsat

DEFAULT_LIMIT = 5_000_000

Symbol = Hashable  # variable name, or (fn, member) for a function cell
Env = dict
Tri = Optional[bool]

# ---------------------------------------------------------------------------
# three-valued compilation


def _compile_term(t: Term) -> Callable[[Env], object]:
    if isinstance(t, IntConst):
        v = t.value
        return lambda env: v
    if isinstance(t, Member):
        name = t.name
        return lambda env: name
    if isinstance(t, Var):
        name = t.name
        return lambda env: env.get(name)
    if isinstance(t, FunApp):
        fn, arg = t.fn, _compile_term(t.arg)

        def app(env: Env) -> object:
            a = arg(env)
            return None if a is None else env.get((fn, a))

        return app
    if isinstance(t, Add):
        parts = [_compile_term(x) for x in t.args]

        def add(env: Env) -> object:
            total = 0
            for p in parts:
                v = p(env)
                if v is None:
                    return None
                total += v  # type: ignore[operator]
            return total

        return add
    if isinstance(t, Sub):
        left, right = _compile_term(t.left), _compile_term(t.right)

        def sub(env: Env) -> object:
            a, b = left(env), right(env)
            return None if a is None or b is None else a - b  # type: ignore[operator]

        return sub
    if isinstance(t, Mul):
        coef, arg = t.coef, _compile_term(t.arg)

        def mul(env: Env) -> object:
            a = arg(env)
            return None if a is None else coef * a  # type: ignore[operator]

        return mul
    if isinstance(t, Ite):
        cond, then, orelse = _compile_formula(t.cond), _compile_term(t.then), _compile_term(t.orelse)

        def ite(env: Env) -> object:
            c = cond(env)
            if c is None:
                a, b = then(env), orelse(env)
                return a if a is not None and a == b else None
            return then(env) if c else orelse(env)

        return ite
    raise TypeError(f"cannot compile term {t!r}")


_OPS = {
    "=": lambda a, b: a == b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def _compile_formula(f: Formula) -> Callable[[Env], Tri]:
    if isinstance(f, BoolConst):
        v = f.value
        return lambda env: v
    if isinstance(f, Cmp):
        op, left, right = _OPS[f.op], _compile_term(f.left), _compile_term(f.right)

        def cmp(env: Env) -> Tri:
            a = left(env)
            if a is None:
                return None
            b = right(env)
            if b is None:
                return None
            return op(a, b)

        return cmp
    if isinstance(f, And):
        parts = [_compile_formula(g) for g in f.args]

        def conj(env: Env) -> Tri:
            unknown = False
            for p in parts:
                v = p(env)
                if v is False:
                    return False
                if v is None:
                    unknown = True
            return None if unknown else True

        return conj
    if isinstance(f, Or):
        parts = [_compile_formula(g) for g in f.args]

        def disj(env: Env) -> Tri:
            unknown = False
            for p in parts:
                v = p(env)
                if v is True:
                    return True
                if v is None:
                    unknown = True
            return None if unknown else False

        return disj
    if isinstance(f, Not):
        arg = _compile_formula(f.arg)

        def negate(env: Env) -> Tri:
            v = arg(env)
            return None if v is None else not v

        return negate
    if isinstance(f, Implies):
        premise, conclusion = _compile_formula(f.premise), _compile_formula(f.conclusion)

        def imp(env: Env) -> Tri:
            p = premise(env)
            if p is False:
                return True
            c = conclusion(env)
            if c is True:
                return True
            if p is True and c is False:
                return False
            return None

        return imp
    raise TypeError(f"cannot compile formula {f!r}")


# ---------------------------------------------------------------------------
# linear structure


def _linear(t: Term) -> list[tuple[dict[str, int], int]]:
    """Linear forms of ``t`` as (coefficients, constant); one per Ite branch.

    Terms that are not integer-linear (function applications) yield [].
    """
    if isinstance(t, IntConst):
        return [({}, t.value)]
    if isinstance(t, Var):
        return [({t.name: 1}, 0)]
    if isinstance(t, Mul):
        return [({v: t.coef * c for v, c in co.items()}, t.coef * k) for co, k in _linear(t.arg)]
    if isinstance(t, (Add, Sub)):
        args = t.args if isinstance(t, Add) else (t.left, t.right)
        signs = [1] * len(args) if isinstance(t, Add) else [1, -1]
        forms: list[tuple[dict[str, int], int]] = [({}, 0)]
        for sign, arg in zip(signs, args):
            sub = _linear(arg)
            if not sub:
                return []
            forms = [_combine(a, b, sign) for a in forms for b in sub]
        return forms
    if isinstance(t, Ite):
        return _linear(t.then) + _linear(t.orelse)
    return []


def _combine(a: tuple[dict[str, int], int], b: tuple[dict[str, int], int], sign: int):
    co = dict(a[0])
    for v, c in b[0].items():
        co[v] = co.get(v, 0) + sign * c
    return ({v: c for v, c in co.items() if c}, a[1] + sign * b[1])


def linear_atoms(f: Formula) -> list[tuple[dict[str, int], int]]:
    """Every integer comparison in ``f`` as ``sum(coef*var) + const`` (compared with 0)."""
    out = []
    for node in walk(f):
        if isinstance(node, Cmp) and not isinstance(node.left.sort, FiniteSort):
            for lf in _linear(node.left):
                for rf in _linear(node.right):
                    out.append(_combine(lf, rf, -1))
    return out


# ---------------------------------------------------------------------------
# candidate domains


@dataclass(frozen=True)
class CandidateDomains:
    """Per integer variable, the ascending candidate values explored."""

    values: dict[str, tuple[int, ...]]

    def __getitem__(self, var: str) -> tuple[int, ...]:
        return self.values[var]

    @classmethod
    def build(cls, s: AssertionSet) -> CandidateDomains:
        base: set[int] = set()
        for a in (*s.hard, *s.soft):
            for coeffs, const in linear_atoms(a.formula):
                if len(coeffs) == 1:
                    (coef,) = coeffs.values()
                    t = Fraction(-const, coef)
                    base |= {math.floor(t), math.ceil(t)}
                elif coeffs:
                    base |= {const, -const}
        for dom in s.var_domains.values():
            if dom.lo is not None:
                base |= {dom.lo, dom.hi}  # type: ignore[arg-type]
        base |= {-1, 0}
        closed = set(base)
        for x, y in itertools.combinations_with_replacement(sorted(base), 2):
            closed |= {x + y, x - y, y - x}
        widened = {v + d for v in closed for d in (-1, 0, 1)}

        values: dict[str, tuple[int, ...]] = {}
        for var, dom in s.var_domains.items():
            if isinstance(dom.sort, FiniteSort):
                continue
            lo, hi = dom.lo, dom.hi
            assert lo is not None and hi is not None
            picked = {v for v in widened if lo <= v <= hi} | {lo, hi}
            picked |= {h for h in dom.hints if lo <= h <= hi}
            values[var] = tuple(sorted(picked))
        return cls(values)


# ---------------------------------------------------------------------------
# problem compilation and search


@dataclass
class _Compiled:
    name: str
    check: Callable[[Env], Tri]
    symbols: frozenset
    atoms: list[tuple[dict[str, int], int]]


class _Problem:
    """An AssertionSet compiled once; ``solve`` answers subset queries."""

    def __init__(self, s: AssertionSet, limit: int = DEFAULT_LIMIT) -> None:
        s.check()
        self.s = s
        self.limit = limit
        self.explored = 0
        self.candidates = CandidateDomains.build(s)
        self.order: list[Symbol] = []
        for fn, decl in s.functions.items():
            self.order += [(fn, m) for m in decl.domain.members]
        self.order += list(s.var_domains)
        self.rank = {sym: i for i, sym in enumerate(self.order)}
        self.compiled: dict[str, _Compiled] = {
            a.name: _Compiled(a.name, _compile_formula(a.formula), self._symbols(a.formula), linear_atoms(a.formula))
            for a in (*s.hard, *s.soft)
        }

    def _symbols(self, f: Formula) -> frozenset:
        syms: set = set()
        for node in walk(f):
            if isinstance(node, Var):
                syms.add(node.name)
            elif isinstance(node, FunApp) and isinstance(node.arg, Member):
                syms.add((node.fn, node.arg.name))
            elif isinstance(node, FunApp):
                # unknown argument: any cell of the table may be read
                syms |= {(node.fn, m) for m in self.s.functions[node.fn].domain.members}
        return frozenset(syms)

    def _values(self, sym: Symbol) -> Sequence:
        if isinstance(sym, tuple):
            return self.s.functions[sym[0]].codomain.members
        dom = self.s.var_domains[sym]
        if isinstance(dom.sort, FiniteSort):
            return dom.sort.members
        return self.candidates[sym]

    def default(self, sym: Symbol):
        return self._values(sym)[0]

    # -- components -------------------------------------------------------

    def components(self, names: Iterable[str]) -> list[list[str]]:
        """Partition assertion names into groups that share no symbols."""
        parent: dict = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        names = list(names)
        for name in names:
            node = ("assertion", name)
            for sym in self.compiled[name].symbols:
                parent[find(node)] = find(sym)
        groups: dict = {}
        for name in names:
            groups.setdefault(find(("assertion", name)), []).append(name)
        return list(groups.values())

    # -- search -----------------------------------------------------------

    def solve(self, names: Sequence[str]) -> Env | None:
        """A model of the named assertions (each component searched alone), or None."""
        env, _ = self.solve_or_blame(names)
        return env

    def solve_or_blame(self, names: Sequence[str]) -> tuple[Env | None, list[str]]:
        """Like ``solve`` but also names the first unsatisfiable component."""
        env: Env = {}
        for group in self.components(names):
            found = self.solve_component(group)
            if found is None:
                return None, group
            env.update(found)
        return env, []

    def solve_component(self, names: Sequence[str]) -> Env | None:
        parts = [self.compiled[n] for n in names]
        symbols = sorted(set().union(*(p.symbols for p in parts)), key=self.rank.__getitem__)
        if any(p.check({}) is False for p in parts if not p.symbols):
            return None
        watchers: dict = {sym: [p for p in parts if sym in p.symbols] for sym in symbols}
        atoms: dict = {sym: [] for sym in symbols}
        for p in parts:
            for coeffs, const in p.atoms:
                for v in coeffs:
                    if v in atoms:
                        atoms[v].append((coeffs, const))
        env: Env = {}
        if self._dfs(symbols, 0, env, watchers, atoms):
            return env
        return None

    def _dynamic(self, var: str, env: Env, atoms) -> set[int]:
        out: set[int] = set()
        for coeffs, const in atoms[var]:
            rest = const
            for v, c in coeffs.items():
                if v == var:
                    continue
                val = env.get(v)
                if val is None:
                    break
                rest += c * val
            else:
                t = Fraction(-rest, coeffs[var])
                lo, hi = math.floor(t), math.ceil(t)
                out |= {lo - 1, lo, hi, hi + 1}
        return out

    def _dfs(self, symbols, depth: int, env: Env, watchers, atoms) -> bool:
        if depth == len(symbols):
            return True
        sym = symbols[depth]
        values = self._values(sym)
        if not isinstance(sym, tuple) and atoms.get(sym):
            dyn = self._dynamic(sym, env, atoms)
            if dyn:
                dom = self.s.var_domains[sym]
                extra = {v for v in dyn if dom.lo <= v <= dom.hi}  # type: ignore[operator]
                values = sorted(extra.union(values))
        for value in values:
            self.explored += 1
            if self.explored > self.limit:
                raise ResourceLimit(self.limit)
            env[sym] = value
            if all(p.check(env) is not False for p in watchers[sym]):
                if self._dfs(symbols, depth + 1, env, watchers, atoms):
                    return True
        env.pop(sym, None)
        return False

    # -- results ----------------------------------------------------------

    def assignment(self, env: Env) -> Assignment:
        values = {v: env[v] if v in env else self.default(v) for v in self.s.var_domains}
        tables = {
            fn: {m: env.get((fn, m), decl.codomain.members[0]) for m in decl.domain.members}
            for fn, decl in self.s.functions.items()
        }
        return Assignment(values, tables)

    def full_env(self, env: Env) -> Env:
        return {sym: env[sym] if sym in env else self.default(sym) for sym in self.order}

    def satisfied_soft(self, env: Env) -> list[str]:
        full = self.full_env(env)
        return [a.name for a in self.s.soft if self.compiled[a.name].check(full) is True]


def _hard_names(s: AssertionSet) -> list[str]:
    return [a.name for a in s.hard]


def _ordered(s: AssertionSet, names: Iterable[str]) -> list[str]:
    wanted = set(names)
    return [a.name for a in (*s.hard, *s.soft) if a.name in wanted]


def solve_bounded(s: AssertionSet, *, limit: int = DEFAULT_LIMIT) -> SolveResult:
    """Decide the hard assertions; soft ones are only reported, not optimized."""
    problem = _Problem(s, limit)
    env, failing = problem.solve_or_blame(_hard_names(s))
    if env is None:
        return Unsat(_minimize(problem, _ordered(s, failing)))
    return Sat(problem.assignment(env), problem.satisfied_soft(env))


def maximize_soft(s: AssertionSet, *, limit: int = DEFAULT_LIMIT) -> SolveResult:
    """Satisfy the hard assertions and as many soft ones as possible.

    Among maximum-cardinality soft sets the one listing the earliest
    declared names wins; among its models, the one with the smallest
    values in declaration order.
    """
    problem = _Problem(s, limit)
    hard = _hard_names(s)
    found, failing = problem.solve_or_blame(hard)
    if found is None:
        return Unsat(_minimize(problem, _ordered(s, failing)))

    soft_names = [a.name for a in s.soft]
    env: Env = {}
    for group in problem.components(hard + soft_names):
        g_hard = [n for n in group if n not in set(soft_names)]
        g_soft = [n for n in soft_names if n in set(group)]
        env.update(_best_subset(problem, g_hard, g_soft))
    return Sat(problem.assignment(env), problem.satisfied_soft(env))


def _best_subset(problem: _Problem, hard: list[str], soft: list[str]) -> Env:
    for size in range(len(soft), -1, -1):
        for chosen in itertools.combinations(soft, size):
            found = problem.solve(hard + list(chosen))
            if found is not None:
                return found
    raise AssertionError("hard assertions were checked satisfiable")


def _minimize(problem: _Problem, initial: list[str]) -> list[str]:
    core = list(initial)
    for name in list(initial):
        trial = [n for n in core if n != name]
        if problem.solve(trial) is None:
            core = trial
    return core


def minimize_core(
    s: AssertionSet,
    initial: Sequence[str],
    *,
    limit: int = DEFAULT_LIMIT,
    is_sat: Callable[[AssertionSet], bool] | None = None,
) -> list[str]:
    """Deletion-based shrinking of an unsatisfiable subset to a 1-minimal core.

    Members are tried for removal in declaration order; a member stays out
    whenever the rest is still unsatisfiable. ``is_sat`` swaps in another
    decision procedure (e.g. an external solver) for the built-in search.
    """
    initial = _ordered(s, initial)
    if is_sat is None:
        problem = _Problem(s, limit)
        if problem.solve(initial) is not None:
            raise NotUnsat(f"assertions {initial} are satisfiable")
        return _minimize(problem, initial)

    if is_sat(s.restrict(initial)):
        raise NotUnsat(f"assertions {initial} are satisfiable")
    core = list(initial)
    for name in initial:
        trial = [n for n in core if n != name]
        if not is_sat(s.restrict(trial)):
            core = trial
    return core


def is_satisfiable(s: AssertionSet, *, limit: int = DEFAULT_LIMIT) -> bool:
    return _Problem(s, limit).solve(_hard_names(s)) is not None


__all__ = [
    "CandidateDomains",
    "DEFAULT_LIMIT",
    "is_satisfiable",
    "linear_atoms",
    "maximize_soft",
    "minimize_core",
    "solve_bounded",
]
