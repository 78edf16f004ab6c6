import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contractcheck.encode import encode_consequence, encode_limitation, encode_performability, encode_spa
from contractcheck.logic import (
    TRUE,
    Assertion,
    AssertionSet,
    VarDomain,
    Var,
    conj,
    day_domain,
    eq,
    evaluate_formula,
    ge,
    le,
)
from contractcheck.solve import (
    CandidateDomains,
    NotUnsat,
    ResourceLimit,
    Sat,
    SolverUnavailable,
    Unsat,
    emit_smtlib,
    maximize_soft,
    minimize_core,
    run_external,
    solve_bounded,
)
from contractcheck.solve.smtlib import SExprError, parse_sexprs

from helpers import bakery_model
from oracle import Oracle
from smtcheck import problems


def day_set(*hard, soft=(), horizon=10, names=None):
    names = names or [f"h{i}" for i in range(len(hard))]
    return AssertionSet(
        hard=[Assertion(n, f) for n, f in zip(names, hard)],
        soft=[Assertion(f"s{i}", f) for i, f in enumerate(soft)],
        var_domains={"d": day_domain(horizon), "e": day_domain(horizon)},
    )


def sound(s, result):
    return all(evaluate_formula(a.formula, result.model) for a in s.hard)


def test_trivial_contradiction():
    d = Var("d")
    assert isinstance(solve_bounded(day_set(conj(eq(d, -1), ge(d, 0)))), Unsat)


def test_empty_hard_set():
    s = day_set()
    result = solve_bounded(s)
    assert isinstance(result, Sat)
    assert set(result.model.values) == {"d", "e"}


def test_transfer_core(bakery):
    s = encode_performability(bakery, "Transfer")
    result = solve_bounded(s)
    assert isinstance(result, Unsat)
    assert result.core == ["own.Bakery", "clm.Transfer", "query.Transfer"]
    assert minimize_core(s, [a.name for a in s.hard]) == result.core


def test_bakery_models_are_sound(bakery):
    queries = [encode_spa(bakery), encode_performability(bakery, "Pay"), encode_consequence(bakery, "Claim2")]
    for s in queries:
        result = solve_bounded(s)
        assert isinstance(result, Sat) and sound(s, result)


def test_maximize_bakery(bakery):
    s = encode_spa(bakery)
    result = maximize_soft(s)
    assert isinstance(result, Sat) and sound(s, result)
    assert result.soft_satisfied == ["soft.Pay", "soft.PretzelWarranty", "soft.Claim1", "soft.ResPurchaser", "soft.ResSeller"]
    assert result.model["d_Transfer"] == -1
    assert result.model["d_Pay"] >= 28


def test_maximize_without_bank_security():
    s = encode_spa(bakery_model("BankSecurity"))
    result = maximize_soft(s)
    assert len(result.soft_satisfied) == len(s.soft) == 6
    assert result.model["d_Transfer"] >= 28 and result.model["d_Pay"] >= 28


def test_maximize_on_unsat_matches_solve():
    d = Var("d")
    s = day_set(ge(d, 3), le(d, 2), soft=[eq(d, 1)])
    assert maximize_soft(s) == solve_bounded(s) == Unsat(["h0", "h1"])


def test_maximize_tie_break_prefers_earliest_names():
    d = Var("d")
    s = day_set(soft=[eq(d, 1), eq(d, 2), eq(d, 3)])
    result = maximize_soft(s)
    assert result.soft_satisfied == ["s0"] and result.model["d"] == 1


def test_minimize_core_examples():
    d = Var("d")
    s = day_set(ge(d, 0), eq(d, -1), TRUE)
    assert minimize_core(s, ["h0", "h1", "h2"]) == ["h0", "h1"]
    single = day_set(conj(ge(d, 1), le(d, 0)))
    assert minimize_core(single, ["h0"]) == ["h0"]
    with pytest.raises(NotUnsat):
        minimize_core(s, ["h0", "h2"])


def test_minimize_core_with_external_decider():
    d = Var("d")
    s = day_set(ge(d, 0), eq(d, -1), TRUE)
    calls = []

    def decide(sub):
        calls.append([a.name for a in sub.hard])
        return Oracle(sub).satisfiable()

    assert minimize_core(s, ["h0", "h1", "h2"], is_sat=decide) == ["h0", "h1"]
    assert calls[0] == ["h0", "h1", "h2"]


def test_resource_limit(bakery):
    with pytest.raises(ResourceLimit) as info:
        maximize_soft(encode_spa(bakery), limit=5)
    assert info.value.limit == 5


def test_determinism(bakery):
    s = encode_spa(bakery)
    assert maximize_soft(s) == maximize_soft(s)
    assert emit_smtlib(s) == emit_smtlib(encode_spa(bakery))


def test_candidate_domains(bakery):
    s = encode_limitation(bakery, "Claim2")
    cands = CandidateDomains.build(s)
    for var, values in cands.values.items():
        dom = s.var_domains[var]
        assert list(values) == sorted(set(values))
        assert all(dom.lo <= v <= dom.hi for v in values)
        assert dom.lo in values and dom.hi in values
    assert -1 in cands["d_PretzelWarranty"]
    assert {28, 29, 42} <= set(cands["d_PretzelWarranty"])
    assert {9999, 10000, 9900} <= set(cands["Pretzels"])


def test_candidate_domains_keep_far_constants():
    d = Var("d")
    s = AssertionSet(hard=[Assertion("h", eq(d, 937))], var_domains={"d": VarDomain(lo=0, hi=1000)})
    assert 937 in CandidateDomains.build(s)["d"]
    assert solve_bounded(s).model["d"] == 937


# -- emission ---------------------------------------------------------------


def test_emit_empty_set():
    assert emit_smtlib(AssertionSet()) == "(set-option :produce-unsat-cores true)\n; declarations\n(check-sat)\n"


def test_emit_ownership_line(bakery):
    script = emit_smtlib(encode_spa(bakery))
    assert "(assert (! (= (owner Bakery) Bank) :named own.Bakery)) ; block BankSecurity" in script
    assert ";(assert-soft (>= d_Transfer 0) :weight 1 :id soft)" in script
    assert script.rstrip().endswith("(get-unsat-core)")


def test_emit_live_soft(bakery):
    script = emit_smtlib(encode_spa(bakery), soft_mode="assert-soft")
    assert "\n(assert-soft (>= d_Transfer 0) :weight 1 :id soft)" in script
    with pytest.raises(ValueError):
        emit_smtlib(encode_spa(bakery), soft_mode="weird")


def test_emitted_scripts_are_well_formed(bakery):
    sets = [encode_spa(bakery)]
    for c in bakery.claims.values():
        sets.append(encode_performability(bakery, c.id) if c.kind.is_primary else encode_consequence(bakery, c.id))
    sets += [encode_limitation(bakery, "Claim1"), encode_limitation(bakery, "Claim2")]
    for s in sets:
        script = emit_smtlib(s)
        assert problems(script, [a.name for a in s.hard]) == []
        parse_sexprs(script)


def test_negative_constants_are_emitted_as_negation():
    s = day_set(eq(Var("d"), -1))
    assert "(= d (- 1))" in emit_smtlib(s)


def test_sexpr_reader():
    assert parse_sexprs("(a (b |c d|) ; note\n e)") == [["a", ["b", "c d"], "e"]]
    with pytest.raises(SExprError):
        parse_sexprs("(a (b)")
    with pytest.raises(SExprError):
        parse_sexprs("a)")


def test_missing_external_solver(bakery):
    with pytest.raises(SolverUnavailable):
        run_external("definitely-not-a-solver-xyz", encode_spa(bakery))


# -- random day constraints against brute force ------------------------------

atoms = st.builds(
    lambda op, var, other, k: op(Var(var), (Var(other) + k) if other else k),
    st.sampled_from([eq, le, ge]),
    st.sampled_from(["d", "e"]),
    st.sampled_from([None, "d", "e"]),
    st.integers(-3, 8),
)


@settings(max_examples=150, deadline=None)
@given(st.lists(atoms, max_size=5), st.lists(atoms, max_size=3), st.integers(0, 6))
def test_random_day_constraints(hard, soft, horizon):
    s = day_set(*hard, soft=soft, horizon=horizon)
    oracle = Oracle(s)
    result = maximize_soft(s)
    assert result.is_sat == oracle.satisfiable()
    if result.is_sat:
        assert sound(s, result)
        assert len(result.soft_satisfied) == oracle.max_soft()
    else:
        assert oracle.is_minimal_core(result.core)
