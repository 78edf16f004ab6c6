"""Brute-force reference semantics for assertion sets.

Every variable ranges over its full declared domain and every function cell
over the whole codomain; each assertion is evaluated once, vectorized over
the complete grid, into a boolean mask. Subsets of assertions are then
decided by AND-ing masks, so verdicts, soft maxima and core minimality can be
checked without touching the solver under test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from contractcheck.logic import (
    Add,
    And,
    AssertionSet,
    BoolConst,
    Cmp,
    FiniteSort,
    FunApp,
    Implies,
    IntConst,
    Ite,
    Member,
    Mul,
    Not,
    Or,
    Sub,
    Var,
)

MAX_CELLS = 3_000_000


class GridTooLarge(ValueError):
    pass


def grid_size(s: AssertionSet) -> int:
    size = 1
    for dom in s.var_domains.values():
        size *= len(dom.sort.members) if isinstance(dom.sort, FiniteSort) else dom.hi - dom.lo + 1
    for decl in s.functions.values():
        size *= len(decl.codomain.members) ** len(decl.domain.members)
    return size


@dataclass
class Grid:
    """All assignments of ``s`` as columns; finite values are member indices."""

    s: AssertionSet
    columns: dict[str, np.ndarray]
    size: int

    @classmethod
    def build(cls, s: AssertionSet) -> Grid:
        axes: list[tuple[str, np.ndarray]] = []
        for name, dom in s.var_domains.items():
            if isinstance(dom.sort, FiniteSort):
                axes.append((name, np.arange(len(dom.sort.members))))
            else:
                axes.append((name, np.arange(dom.lo, dom.hi + 1)))
        for fn, decl in s.functions.items():
            for member in decl.domain.members:
                axes.append((f"{fn}({member})", np.arange(len(decl.codomain.members))))
        size = int(np.prod([len(v) for _, v in axes], dtype=np.int64)) if axes else 1
        if size > MAX_CELLS:
            raise GridTooLarge(f"{size} cells")
        idx = np.unravel_index(np.arange(size), [len(v) for _, v in axes]) if axes else ()
        columns = {name: values[i] for (name, values), i in zip(axes, idx)}
        return cls(s, columns, size)

    # -- evaluation ---------------------------------------------------------

    def term(self, t) -> np.ndarray | int:
        if isinstance(t, IntConst):
            return t.value
        if isinstance(t, Member):
            return t.sort.members.index(t.name)
        if isinstance(t, Var):
            return self.columns[t.name]
        if isinstance(t, FunApp):
            decl = self.s.functions[t.fn]
            arg = self.term(t.arg)
            cells = [self.columns[f"{t.fn}({m})"] for m in decl.domain.members]
            if isinstance(arg, int):
                return cells[arg]
            return np.choose(arg, cells)
        if isinstance(t, Add):
            total: np.ndarray | int = 0
            for a in t.args:
                total = total + self.term(a)
            return total
        if isinstance(t, Sub):
            return self.term(t.left) - self.term(t.right)
        if isinstance(t, Mul):
            return t.coef * self.term(t.arg)
        if isinstance(t, Ite):
            return np.where(self.formula(t.cond), self.term(t.then), self.term(t.orelse))
        raise TypeError(t)

    def formula(self, f) -> np.ndarray:
        ones = np.ones(self.size, dtype=bool)
        if isinstance(f, BoolConst):
            return ones if f.value else ~ones
        if isinstance(f, Cmp):
            x, y = self.term(f.left), self.term(f.right)
            out = {
                "=": lambda: x == y,
                "<=": lambda: x <= y,
                "<": lambda: x < y,
                ">=": lambda: x >= y,
                ">": lambda: x > y,
            }[f.op]()
            return ones & out
        if isinstance(f, And):
            out = ones
            for g in f.args:
                out = out & self.formula(g)
            return out
        if isinstance(f, Or):
            out = ~ones
            for g in f.args:
                out = out | self.formula(g)
            return out
        if isinstance(f, Not):
            return ~self.formula(f.arg)
        if isinstance(f, Implies):
            return ~self.formula(f.premise) | self.formula(f.conclusion)
        raise TypeError(f)


class Oracle:
    def __init__(self, s: AssertionSet) -> None:
        self.grid = Grid.build(s)
        self.hard = {a.name: self.grid.formula(a.formula) for a in s.hard}
        self.soft = {a.name: self.grid.formula(a.formula) for a in s.soft}

    def mask(self, names) -> np.ndarray:
        out = np.ones(self.grid.size, dtype=bool)
        for n in names:
            out = out & self.hard[n]
        return out

    def satisfiable(self, names=None) -> bool:
        return bool(self.mask(self.hard if names is None else names).any())

    def max_soft(self) -> int | None:
        """Largest number of soft assertions any model satisfies; None if unsat."""
        feasible = self.mask(self.hard)
        if not feasible.any():
            return None
        if not self.soft:
            return 0
        counts = np.zeros(self.grid.size, dtype=np.int64)
        for m in self.soft.values():
            counts += m
        return int(counts[feasible].max())

    def is_minimal_core(self, core) -> bool:
        """Unsat, and every proper subset obtained by dropping one member is sat."""
        if self.satisfiable(core):
            return False
        return all(self.satisfiable([n for n in core if n != drop]) for drop in core)

