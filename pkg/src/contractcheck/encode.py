"""Compile a ContractModel into named assertion sets.

Naming scheme (the analysis layer maps each name back to a block):

    own.<asset>     ownership fact: owner(asset) = party
    grp.<claim>     a primary claim together with its consequence claims
    clm.<claim>     a single claim's performance premises
    query.<claim>   "the claim is performed" (day >= 0)
    breach.<claim>  the primary claim is breached
    lim.<claim>     the consequence can still be performed after the limitation day
    dom.<var>       variable range
    soft.<claim>    preferred execution: primaries performed, secondaries not
"""

from __future__ import annotations

import math

from .logic import (
    INT,
    Assertion,
    AssertionSet,
    FiniteSort,
    Formula,
    FunApp,
    FunctionDecl,
    Member,
    Var,
    VarDomain,
    conj,
    day_domain,
    disj,
    eq,
    free_vars,
    functions_used,
    ge,
    gt,
    implies,
    le,
    lt,
)
from .model import ClaimKind, ClaimSpec, ContractModel


class EncodeError(ValueError):
    pass


class UnknownClaim(EncodeError, KeyError):
    pass


class NotAConsequence(EncodeError):
    pass


class NotAPrimary(EncodeError):
    pass


OWNER = "owner"


class _Encoder:
    def __init__(self, m: ContractModel) -> None:
        self.m = m
        self.person = FiniteSort("Person", tuple(m.parties)) if m.parties else None
        self.obj = FiniteSort("Object", tuple(m.assets)) if m.assets else None
        self.domains = self._domains()

    # -- symbols ----------------------------------------------------------

    def _domains(self) -> dict[str, VarDomain]:
        m = self.m
        out: dict[str, VarDomain] = {c.day_var: day_domain(m.horizon) for c in m.claims.values()}

        measures: dict[str, tuple[int, set[int]]] = {}
        for w in m.claims.values():
            if w.kind is not ClaimKind.WARRANTY:
                continue
            thr = w.threshold
            assert w.measure_name is not None and thr is not None
            hi, hints = measures.get(w.measure_name, (0, set()))
            hints |= {0, thr - 1, thr, thr + 1, 2 * thr}
            hints |= {thr - c.unit for c in m.consequences_of(w.id) if c.unit}
            measures[w.measure_name] = (max(hi, 2 * thr, thr + 1), hints)
        for name, (hi, hints) in measures.items():
            out[name] = VarDomain(INT, 0, hi, tuple(sorted(h for h in hints if 0 <= h <= hi)))

        for c in m.claims.values():
            if c.kind is ClaimKind.COMPENSATION:
                w = m.claims[c.primary]  # type: ignore[index]
                assert w.threshold is not None and c.unit and c.rate is not None and c.minimum is not None
                kmax = math.ceil(w.threshold / c.unit)
                out[c.units_var] = VarDomain(INT, 0, kmax)
                out[c.amount_var] = VarDomain(INT, 0, max(c.minimum, c.rate * kmax))
        return out

    def day(self, c: ClaimSpec) -> Var:
        return Var(c.day_var)

    def owner_is(self, asset: str, party: str) -> Formula:
        assert self.obj is not None and self.person is not None
        return eq(FunApp(OWNER, Member(asset, self.obj), self.person), Member(party, self.person))

    # -- claim formulas ---------------------------------------------------

    def ownership(self) -> list[Assertion]:
        return [
            Assertion(f"own.{f.asset}", self.owner_is(f.asset, f.owner), f.id)
            for f in self.m.facts.values()
        ]

    def claim(self, c: ClaimSpec) -> Formula:
        m, d = self.m, self.day(c)
        if c.kind in (ClaimKind.TRANSFER, ClaimKind.PAY):
            assert c.subject is not None and c.due_day is not None
            return disj(eq(d, -1), conj(ge(d, c.due_day), self.owner_is(c.subject, c.debtor)))
        if c.kind is ClaimKind.WARRANTY:
            return disj(conj(eq(d, -1), self.kept(c)), self.asserted(c))
        primary = m.claims[c.primary]  # type: ignore[index]
        dp = self.day(primary)
        if c.kind is ClaimKind.PERFORMANCE:
            assert c.perform_window is not None
            return disj(
                eq(d, -1),
                conj(ge(dp, 0), lt(dp, d), le(d, dp + c.perform_window)),
            )
        if c.kind is ClaimKind.COMPENSATION:
            assert c.perform_window is not None and c.pay_window is not None
            amount = Var(c.amount_var)
            return conj(
                self.compensation_amount(c),
                disj(
                    conj(eq(d, -1), eq(amount, 0)),
                    conj(ge(dp, 0), lt(dp, d), le(d, dp + c.perform_window + c.pay_window)),
                ),
            )
        if c.kind is ClaimKind.RESTITUTION:
            assert primary.due_day is not None
            return disj(eq(d, -1), conj(eq(dp, -1), gt(d, primary.due_day)))
        raise EncodeError(f"unsupported claim kind {c.kind}")

    def kept(self, w: ClaimSpec) -> Formula:
        return ge(Var(w.measure_name), w.threshold)  # type: ignore[arg-type]

    def asserted(self, w: ClaimSpec) -> Formula:
        """The warranty is breached and the breach is asserted in time."""
        d = self.day(w)
        close = self.m.closing_day
        return conj(
            le(close, d),
            le(d, close + w.assert_window),  # type: ignore[operator]
            lt(Var(w.measure_name), w.threshold),  # type: ignore[arg-type]
        )

    def compensation_amount(self, c: ClaimSpec) -> Formula:
        # shortfall rounded up to whole units, paid at rate per unit, never below minimum
        w = self.m.claims[c.primary]  # type: ignore[index]
        d, k, amount = self.day(c), Var(c.units_var), Var(c.amount_var)
        shortfall = w.threshold - Var(w.measure_name)  # type: ignore[operator]
        return implies(
            ge(d, 0),
            conj(
                ge(shortfall, 1),
                ge(k, 1),
                lt(c.unit * (k - 1), shortfall),  # type: ignore[operator]
                le(shortfall, c.unit * k),  # type: ignore[operator]
                ge(amount, c.rate * k),  # type: ignore[operator]
                ge(amount, c.minimum),  # type: ignore[arg-type]
                disj(eq(amount, c.rate * k), eq(amount, c.minimum)),  # type: ignore[operator, arg-type]
            ),
        )

    def breach(self, primary: ClaimSpec) -> Formula:
        if primary.kind is ClaimKind.WARRANTY:
            return self.asserted(primary)
        return eq(self.day(primary), -1)

    # -- assembly ---------------------------------------------------------

    def finish(self, hard: list[Assertion], soft: list[Assertion] | None = None) -> AssertionSet:
        soft = soft or []
        used: set[str] = set()
        fns: set[str] = set()
        for a in (*hard, *soft):
            used |= free_vars(a.formula)
            fns |= functions_used(a.formula)
        domains = {v: dom for v, dom in self.domains.items() if v in used}
        dates_block = self.m.block_of.get("dates")
        hard = hard + [
            Assertion(f"dom.{v}", conj(ge(Var(v), dom.lo), le(Var(v), dom.hi)), dates_block)  # type: ignore[arg-type]
            for v, dom in domains.items()
        ]
        functions = {}
        if OWNER in fns:
            assert self.obj is not None and self.person is not None
            functions[OWNER] = FunctionDecl(self.obj, self.person)
        s = AssertionSet(hard=hard, soft=soft, var_domains=domains, functions=functions)
        s.check()
        return s

    def lookup(self, claim_id: str) -> ClaimSpec:
        try:
            return self.m.claims[claim_id]
        except KeyError:
            raise UnknownClaim(claim_id) from None


def encode_spa(m: ContractModel) -> AssertionSet:
    """Whole-contract execution: ownership, one group per primary claim, soft preferences."""
    enc = _Encoder(m)
    hard = enc.ownership()
    for c in m.primaries():
        members = [c, *m.consequences_of(c.id)]
        hard.append(Assertion(f"grp.{c.id}", conj(*(enc.claim(x) for x in members)), m.block_of[c.id]))
    soft = []
    for c in m.claims.values():
        if c.kind in (ClaimKind.TRANSFER, ClaimKind.PAY):
            soft.append(Assertion(f"soft.{c.id}", ge(enc.day(c), 0), m.block_of[c.id]))
        elif c.kind in (ClaimKind.WARRANTY, ClaimKind.PERFORMANCE, ClaimKind.RESTITUTION):
            soft.append(Assertion(f"soft.{c.id}", eq(enc.day(c), -1), m.block_of[c.id]))
    return enc.finish(hard, soft)


def encode_performability(m: ContractModel, claim_id: str) -> AssertionSet:
    """Can the primary claim be performed given the ownership facts?

    For warranties the unasserted reading (condition kept) counts as
    performable, so no ``query`` assertion is added for them.
    """
    enc = _Encoder(m)
    c = enc.lookup(claim_id)
    if not c.kind.is_primary:
        raise NotAPrimary(claim_id)
    hard = enc.ownership() + [Assertion(f"clm.{c.id}", enc.claim(c), m.block_of[c.id])]
    if c.kind is not ClaimKind.WARRANTY:
        hard.append(Assertion(f"query.{c.id}", ge(enc.day(c), 0), m.block_of[c.id]))
    return enc.finish(hard)


def encode_consequence(m: ContractModel, claim_id: str) -> AssertionSet:
    """Can the consequence claim be performed once its primary is breached?"""
    enc = _Encoder(m)
    s = enc.lookup(claim_id)
    if s.primary is None:
        raise NotAConsequence(claim_id)
    primary = m.claims[s.primary]
    hard = enc.ownership() + [
        Assertion(f"breach.{primary.id}", enc.breach(primary), m.block_of[primary.id]),
        Assertion(f"clm.{s.id}", enc.claim(s), m.block_of[s.id]),
        Assertion(f"query.{s.id}", ge(enc.day(s), 0), m.block_of[s.id]),
    ]
    return enc.finish(hard)


def window_end(s: ClaimSpec) -> int:
    """Days after assertion by which a warranty consequence must be performed."""
    if s.kind is ClaimKind.PERFORMANCE:
        return s.perform_window  # type: ignore[return-value]
    if s.kind is ClaimKind.COMPENSATION:
        return s.perform_window + s.pay_window  # type: ignore[operator]
    raise NotAConsequence(s.id)


def limitation_day(m: ContractModel, s: ClaimSpec) -> int:
    w = m.claims[s.primary]  # type: ignore[index]
    return m.closing_day + w.limitation  # type: ignore[operator]


def encode_limitation(m: ContractModel, claim_id: str) -> AssertionSet:
    """SAT means the debtor may lawfully delay performance past the limitation day."""
    enc = _Encoder(m)
    s = enc.lookup(claim_id)
    if s.kind not in (ClaimKind.PERFORMANCE, ClaimKind.COMPENSATION):
        raise NotAConsequence(claim_id)
    w = m.claims[s.primary]  # type: ignore[index]
    spa = encode_spa(m)
    hard = [a for a in spa.hard if not a.name.startswith("dom.")] + [
        Assertion(f"breach.{w.id}", enc.breach(w), m.block_of[w.id]),
        Assertion(
            f"lim.{s.id}",
            lt(limitation_day(m, s), enc.day(w) + window_end(s)),
            m.block_of[s.id],
        ),
    ]
    return enc.finish(hard)


__all__ = [
    "EncodeError",
    "NotAConsequence",
    "NotAPrimary",
    "UnknownClaim",
    "encode_consequence",
    "encode_limitation",
    "encode_performability",
    "encode_spa",
    "limitation_day",
    "window_end",
]
