"""Run the contract analyses and turn solver answers into reports.

Three analyses are available:

* performability -- can each primary claim be performed, and each
  consequence claim once its primary is breached?
* execution -- is there an execution of the whole contract, preferring
  primary claims performed and secondary claims not needed?
* limitation -- can a warranty consequence legally fall due after the
  limitation day?

Text report layout::

    contract: bakery.spa (horizon 365)
    WARNING: ...
    verdicts:
      performability Transfer: not performable
      ...
    execution: sat (5 of 6 soft constraints satisfied)
      day 28: Pay performed
      Transfer: not performed
    cores:
      performability Transfer:
        own.Bakery -> block BankSecurity (lines 26-29)
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Protocol

from .encode import (
    encode_consequence,
    encode_limitation,
    encode_performability,
    encode_spa,
)
from .logic import Assertion, AssertionSet, Assignment, Var, evaluate_formula, le
from .model import ClaimKind, ContractModel, InternalError
from .solve.bounded import DEFAULT_LIMIT, is_satisfiable, maximize_soft, solve_bounded
from .solve.external import DEFAULT_TIMEOUT, run_external
from .solve.result import ResourceLimit, Sat, SolverProtocolError, SolverUnavailable, SolveResult, Unsat


class Analysis(str, enum.Enum):
    PERFORMABILITY = "performability"
    EXECUTION = "execution"
    LIMITATION = "limitation"
    ALL = "all"


class Check(str, enum.Enum):
    """What a single per-claim query asks."""

    PERFORMABILITY = "performability"
    CONSEQUENCE = "consequence"
    LIMITATION = "limitation"


class Verdict(str, enum.Enum):
    PERFORMABLE = "performable"
    NOT_PERFORMABLE = "not_performable"
    DEFECT_FOUND = "defect_found"
    NO_DEFECT = "no_defect"
    ERROR = "error"


@dataclass(frozen=True)
class CoreEntry:
    assertion: str
    block: str
    line_start: int
    line_end: int


@dataclass
class ClaimVerdict:
    claim: str
    analysis: Check
    verdict: Verdict
    witness: Assignment | None = None
    core_blocks: list[CoreEntry] | None = None
    assert_day: int | None = None
    error: str | None = None


@dataclass(frozen=True)
class TimelineEvent:
    day: int
    claim: str
    event: str


@dataclass
class ExecutionResult:
    verdict: str  # "sat", "unsat" or "error"
    soft_satisfied: list[str] = field(default_factory=list)
    soft_violated: list[str] = field(default_factory=list)
    timeline: list[TimelineEvent] = field(default_factory=list)
    unperformed: list[tuple[str, str]] = field(default_factory=list)
    model: Assignment | None = None
    core_blocks: list[CoreEntry] | None = None
    error: str | None = None


@dataclass
class AnalysisReport:
    contract: str
    horizon: int
    analyses: list[Analysis] = field(default_factory=list)
    performability: dict[str, ClaimVerdict] = field(default_factory=dict)
    execution: ExecutionResult | None = None
    limitation: dict[str, ClaimVerdict] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Query:
    analysis: Analysis
    claim: str | None
    assertions: AssertionSet
    check: Check | None = None  # None for the whole-contract execution query

    @property
    def label(self) -> str:
        return f"{self.analysis.value}.{self.claim or 'contract'}"


# ---------------------------------------------------------------------------
# backends


class Backend(Protocol):
    def decide(self, s: AssertionSet) -> SolveResult: ...

    def maximize(self, s: AssertionSet) -> SolveResult: ...

    def is_sat(self, s: AssertionSet) -> bool: ...


@dataclass
class BuiltinBackend:
    limit: int = DEFAULT_LIMIT

    def decide(self, s: AssertionSet) -> SolveResult:
        return solve_bounded(s, limit=self.limit)

    def maximize(self, s: AssertionSet) -> SolveResult:
        return maximize_soft(s, limit=self.limit)

    def is_sat(self, s: AssertionSet) -> bool:
        return is_satisfiable(s, limit=self.limit)


@dataclass
class ExternalBackend:
    command: str = "z3 -in"
    timeout: float = DEFAULT_TIMEOUT

    def decide(self, s: AssertionSet) -> SolveResult:
        return run_external(self.command, s, timeout=self.timeout)

    def maximize(self, s: AssertionSet) -> SolveResult:
        return run_external(self.command, s, maximize=True, timeout=self.timeout)

    def is_sat(self, s: AssertionSet) -> bool:
        return run_external(self.command, s.restrict(a.name for a in s.hard), timeout=self.timeout).is_sat


# ---------------------------------------------------------------------------
# running


def _selected(which: Analysis | str) -> list[Analysis]:
    which = Analysis(which)
    if which is Analysis.ALL:
        return [Analysis.PERFORMABILITY, Analysis.EXECUTION, Analysis.LIMITATION]
    return [which]


def plan_queries(m: ContractModel, which: Analysis | str = Analysis.ALL) -> list[Query]:
    """Every solver query the chosen analyses need, in report order."""
    queries = []
    for analysis in _selected(which):
        if analysis is Analysis.PERFORMABILITY:
            for c in m.claims.values():
                if c.kind.is_primary:
                    queries.append(Query(analysis, c.id, encode_performability(m, c.id), Check.PERFORMABILITY))
                else:
                    queries.append(Query(analysis, c.id, encode_consequence(m, c.id), Check.CONSEQUENCE))
        elif analysis is Analysis.EXECUTION:
            queries.append(Query(analysis, None, encode_spa(m)))
        else:
            for c in m.claims.values():
                if c.kind in (ClaimKind.PERFORMANCE, ClaimKind.COMPENSATION):
                    queries.append(Query(analysis, c.id, encode_limitation(m, c.id), Check.LIMITATION))
    return queries


_SOLVER_FAILURES = (ResourceLimit, SolverUnavailable, SolverProtocolError)


def run_analysis(
    m: ContractModel,
    which: Analysis | str = Analysis.ALL,
    *,
    backend: Backend | None = None,
    contract: str = "",
) -> AnalysisReport:
    backend = backend or BuiltinBackend()
    report = AnalysisReport(contract=contract, horizon=m.horizon, analyses=_selected(which))
    for q in plan_queries(m, which):
        if q.analysis is Analysis.EXECUTION:
            report.execution = _execution(m, q.assertions, backend)
            continue
        assert q.claim is not None and q.check is not None
        try:
            if q.analysis is Analysis.PERFORMABILITY:
                verdict = _performability(m, q, backend)
            else:
                verdict = _limitation(m, q, backend)
        except _SOLVER_FAILURES as exc:
            verdict = ClaimVerdict(q.claim, q.check, Verdict.ERROR, error=str(exc))
        target = report.performability if q.analysis is Analysis.PERFORMABILITY else report.limitation
        target[q.claim] = verdict

    blocked = [c for c, v in report.performability.items() if v.verdict is Verdict.NOT_PERFORMABLE]
    if report.execution is not None and report.execution.verdict == "sat" and blocked:
        report.warnings.append(
            "inconsistent yet executable: "
            + ", ".join(blocked)
            + " cannot be performed, but an execution of the contract exists"
        )
    return report


def _checked_witness(s: AssertionSet, model: Assignment) -> Assignment:
    for a in s.hard:
        if not evaluate_formula(a.formula, model):
            raise InternalError(f"solver model violates {a.name}")
    return model


def _core_blocks(m: ContractModel, s: AssertionSet, core: list[str], backend: Backend) -> list[CoreEntry]:
    if backend.is_sat(s.restrict(core)):
        raise InternalError(f"reported core {core} is satisfiable")
    entries = []
    for name in core:
        block = s.hard_named(name).block_id
        span = m.spans.get(block) if block else None
        if block is None or span is None:
            raise InternalError(f"assertion {name} has no source block")
        entries.append(CoreEntry(name, block, span.line_start, span.line_end))
    return entries


def _performability(m: ContractModel, q: Query, backend: Backend) -> ClaimVerdict:
    result = backend.decide(q.assertions)
    if isinstance(result, Sat):
        witness = _checked_witness(q.assertions, result.model)
        return ClaimVerdict(q.claim, q.check, Verdict.PERFORMABLE, witness=witness)  # type: ignore[arg-type]
    core = _core_blocks(m, q.assertions, result.core, backend)
    return ClaimVerdict(q.claim, q.check, Verdict.NOT_PERFORMABLE, core_blocks=core)  # type: ignore[arg-type]


def _limitation(m: ContractModel, q: Query, backend: Backend) -> ClaimVerdict:
    s = q.assertions
    result = backend.decide(s)
    if isinstance(result, Unsat):
        return ClaimVerdict(q.claim, q.check, Verdict.NO_DEFECT)  # type: ignore[arg-type]
    warranty = m.claims[m.claims[q.claim].primary]  # type: ignore[index]
    day_var = Var(warranty.day_var)
    witness = _checked_witness(s, result.model)
    # push the assertion day down until nothing earlier works
    while True:
        day = witness[warranty.day_var]
        earlier = s.with_hard(Assertion(f"earliest.{warranty.id}", le(day_var, day - 1)))  # type: ignore[operator]
        attempt = backend.decide(earlier)
        if isinstance(attempt, Unsat):
            break
        witness = _checked_witness(s, attempt.model)
    return ClaimVerdict(
        q.claim, q.check, Verdict.DEFECT_FOUND, witness=witness, assert_day=witness[warranty.day_var]  # type: ignore[arg-type]
    )


_EVENTS = {
    ClaimKind.TRANSFER: "performed",
    ClaimKind.PAY: "performed",
    ClaimKind.PERFORMANCE: "performed",
    ClaimKind.WARRANTY: "asserted",
    ClaimKind.COMPENSATION: "compensated",
    ClaimKind.RESTITUTION: "restituted",
}


def timeline(m: ContractModel, model: Assignment) -> tuple[list[TimelineEvent], list[tuple[str, str]]]:
    """Events for every claim day >= 0, plus the claims that never happen."""
    events = []
    idle = []
    for c in m.claims.values():
        day = model.values.get(c.day_var)
        if isinstance(day, int) and day >= 0:
            events.append(TimelineEvent(day, c.id, _EVENTS[c.kind]))
        else:
            idle.append((c.id, "not asserted" if c.kind is ClaimKind.WARRANTY else "not performed"))
    # stable sort keeps declaration order among same-day events
    events.sort(key=lambda e: e.day)
    return events, idle


def _execution(m: ContractModel, s: AssertionSet, backend: Backend) -> ExecutionResult:
    try:
        result = backend.maximize(s)
        if isinstance(result, Unsat):
            return ExecutionResult("unsat", core_blocks=_core_blocks(m, s, result.core, backend))
    except _SOLVER_FAILURES as exc:
        return ExecutionResult("error", error=str(exc))
    model = _checked_witness(s, result.model)
    events, idle = timeline(m, model)
    satisfied = [a.name for a in s.soft if a.name in set(result.soft_satisfied)]
    violated = [a.name for a in s.soft if a.name not in set(result.soft_satisfied)]
    return ExecutionResult("sat", satisfied, violated, events, idle, model)


# ---------------------------------------------------------------------------
# rendering


def exit_code(r: AnalysisReport) -> int:
    """0 clean, 1 defects found, 3 a solver gave up; depends on verdicts only."""
    verdicts = [v.verdict for v in (*r.performability.values(), *r.limitation.values())]
    if Verdict.ERROR in verdicts or (r.execution is not None and r.execution.verdict == "error"):
        return 3
    if Verdict.NOT_PERFORMABLE in verdicts or Verdict.DEFECT_FOUND in verdicts:
        return 1
    if r.execution is not None and r.execution.verdict != "sat":
        return 1
    return 0


def _cores_json(entries: list[CoreEntry]) -> list[dict]:
    return [
        {"assertion": e.assertion, "block": e.block, "line_start": e.line_start, "line_end": e.line_end}
        for e in entries
    ]


def report_to_dict(r: AnalysisReport) -> dict:
    analyses: dict = {}
    for analysis in r.analyses:
        if analysis is Analysis.PERFORMABILITY:
            section = {}
            for claim, v in r.performability.items():
                entry: dict = {"verdict": v.verdict.value}
                if v.witness is not None:
                    entry["witness"] = v.witness.flat()
                if v.core_blocks is not None:
                    entry["core_blocks"] = _cores_json(v.core_blocks)
                if v.error is not None:
                    entry["error"] = v.error
                section[claim] = entry
            analyses["performability"] = section
        elif analysis is Analysis.EXECUTION and r.execution is not None:
            ex = r.execution
            entry = {
                "verdict": ex.verdict,
                "soft_satisfied": ex.soft_satisfied,
                "soft_violated": ex.soft_violated,
                "timeline": [{"day": e.day, "claim": e.claim, "event": e.event} for e in ex.timeline],
            }
            if ex.core_blocks is not None:
                entry["core_blocks"] = _cores_json(ex.core_blocks)
            if ex.error is not None:
                entry["error"] = ex.error
            analyses["execution"] = entry
        elif analysis is Analysis.LIMITATION:
            section = {}
            for claim, v in r.limitation.items():
                entry = {"verdict": v.verdict.value}
                if v.assert_day is not None:
                    entry["witness_assert_day"] = v.assert_day
                if v.error is not None:
                    entry["error"] = v.error
                section[claim] = entry
            analyses["limitation"] = section
    return {"contract": r.contract, "horizon": r.horizon, "analyses": analyses, "warnings": list(r.warnings)}


def _witness_text(w: Assignment) -> str:
    return ", ".join(f"{k}={v}" for k, v in w.flat().items())


def _verdict_text(v: ClaimVerdict) -> str:
    text = v.verdict.value.replace("_", " ")
    if v.verdict is Verdict.DEFECT_FOUND:
        text += f" (warranty asserted on day {v.assert_day} still leaves the claim due after the limitation day)"
    if v.error:
        text += f": {v.error}"
    return text


def _render_text(r: AnalysisReport) -> str:
    out = [f"contract: {r.contract} (horizon {r.horizon})"]
    out += [f"WARNING: {w}" for w in r.warnings]
    verdicts = [(Analysis.PERFORMABILITY, r.performability), (Analysis.LIMITATION, r.limitation)]

    if r.performability or r.limitation:
        out.append("verdicts:")
    for analysis, table in verdicts:
        for claim, v in table.items():
            out.append(f"  {analysis.value} {claim}: {_verdict_text(v)}")
            if v.witness is not None and analysis is Analysis.PERFORMABILITY:
                out.append(f"    witness: {_witness_text(v.witness)}")

    ex = r.execution
    if ex is not None:
        if ex.verdict == "sat":
            total = len(ex.soft_satisfied) + len(ex.soft_violated)
            out.append(f"execution: sat ({len(ex.soft_satisfied)} of {total} soft constraints satisfied)")
            out += [f"  day {e.day}: {e.claim} {e.event}" for e in ex.timeline]
            out += [f"  {claim}: {status}" for claim, status in ex.unperformed]
            if ex.soft_violated:
                out.append(f"  violated: {', '.join(ex.soft_violated)}")
        else:
            out.append(f"execution: {ex.verdict}" + (f": {ex.error}" if ex.error else ""))

    cores = [(f"{a.value} {c}", v.core_blocks) for a, t in verdicts for c, v in t.items() if v.core_blocks]
    if ex is not None and ex.core_blocks:
        cores.append(("execution", ex.core_blocks))
    if cores:
        out.append("cores:")
        for title, entries in cores:
            out.append(f"  {title}:")
            for e in entries:
                lines = f"line {e.line_start}" if e.line_start == e.line_end else f"lines {e.line_start}-{e.line_end}"
                out.append(f"    {e.assertion} -> block {e.block} ({lines})")
    return "\n".join(out) + "\n"


def render_report(r: AnalysisReport, format: str = "text") -> str:
    if format == "json":
        return json.dumps(report_to_dict(r), indent=2) + "\n"
    if format == "text":
        return _render_text(r)
    raise ValueError(f"unknown format {format!r}")
