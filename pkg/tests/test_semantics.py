import pytest

from stagesem.declarations import derive
from stagesem.filters import ll_all, ll_pointwise_nat
from stagesem.semantics import (
    eval_ll, eval_ll_audit, eval_m, eval_tarskian, forced_value, materialize,
)
from stagesem.syntax import (
    And, Atom, Bottom, Exists, Forall, Implies, Signature, parse_formula,
)
from stagesem.system import (
    ClassicalStructure, ExplicitPoset, Naturals, OracleFamily, StageSystem,
    check_compatibility, union_structure,
)


SIG2 = Signature({"<=": 2})
NAT_SYS = StageSystem(
    index_set=Naturals(),
    signature=SIG2,
    stage_fn=lambda i: frozenset(range(i)),
    families={"<=": OracleFamily(2, lambda a, b: a <= b)},
)
FORALL_LEQ = Forall(1, Atom(2, "<=", (1, 0)))


def perfect(n):
    return n > 1 and sum(d for d in range(1, n) if n % d == 0) == n


PERFECT_SYS = StageSystem(
    index_set=Naturals(),
    signature=Signature({"R": 2}),
    stage_fn=lambda i: frozenset(range(i)),
    families={"R": OracleFamily(2, lambda a, b: perfect(a + b))},
)


def test_example_forall_leq_true_at_context_one():
    ll = ll_pointwise_nat()
    d = derive(NAT_SYS, ll, (1,), FORALL_LEQ)
    assert eval_ll(NAT_SYS, d, (0,)).is_true


def test_example_forall_leq_false_at_context_two():
    ll = ll_pointwise_nat()
    d = derive(NAT_SYS, ll, (2,), FORALL_LEQ)
    assert eval_ll(NAT_SYS, d, (0,)).is_false


def test_bottom_never_holds():
    ll = ll_pointwise_nat()
    d = derive(NAT_SYS, ll, (3,), Bottom(1))
    for a in range(3):
        assert eval_ll(NAT_SYS, d, (a,)).is_false


def test_eval_ll_rejects_assignment_outside_stage():
    ll = ll_pointwise_nat()
    d = derive(NAT_SYS, ll, (1,), FORALL_LEQ)
    with pytest.raises(ValueError):
        eval_ll(NAT_SYS, d, (5,))


def test_audit_reports_divergence_for_inadequate_relation():
    ll = ll_pointwise_nat()
    d = derive(NAT_SYS, ll, (1,), FORALL_LEQ)
    value, divergences = eval_ll_audit(NAT_SYS, ll, d, (0,), alternatives=3)
    assert value.is_true
    assert divergences
    report = {(dv.recorded_index, dv.alternative_index,
               dv.alternative_value.kind) for dv in divergences}
    assert (1, 2, "false") in report


def test_audit_quantifier_free_is_empty():
    ll = ll_pointwise_nat()
    d = derive(NAT_SYS, ll, (2, 3), Atom(2, "<=", (0, 1)))
    value, divergences = eval_ll_audit(NAT_SYS, ll, d, (1, 2))
    assert value.is_true
    assert divergences == []


def test_eval_m_finite_matches_tarskian_on_union():
    iset = ExplicitPoset.from_closure(("a", "b"), {("a", "b")})
    sys = StageSystem(
        index_set=iset,
        signature=Signature({"P": 1}),
        stage_fn=lambda i: frozenset({0} if i == "a" else {0, 1}),
        families={"P": OracleFamily(1, lambda x: x == 1)},
    )
    phi = parse_formula("exists x0 P(x0)", Signature({"P": 1}))
    assert eval_m(sys, (), phi).is_true
    assert eval_tarskian(union_structure(sys), phi, ())


def test_eval_m_naturals_witness_found():
    phi = parse_formula("exists x1 R(x0, x1)", Signature({"R": 2}))
    assert eval_m(PERFECT_SYS, (8,), phi, (7,), budget=22).is_true
    assert eval_m(PERFECT_SYS, (8,), phi, (7,), budget=10).is_unknown


def test_eval_m_propositionally_forced_false():
    phi = parse_formula("exists x0 (x0 <= x0 & false)", SIG2)
    assert eval_m(NAT_SYS, (), phi, (), budget=5).is_false


def test_eval_m_forall_unknown_without_counterexample():
    phi = parse_formula("forall x0 (x0 <= x0)", SIG2)
    assert eval_m(NAT_SYS, (), phi, (), budget=8).is_unknown
    # a counterexample inside the budget settles the universal
    bad = parse_formula("forall x1 (x1 <= x0)", SIG2)
    assert eval_m(NAT_SYS, (1,), bad, (0,), budget=8).is_false


def test_eval_m_forced_true_forall():
    phi = parse_formula("forall x0 (false -> x0 <= x0)", SIG2)
    assert eval_m(NAT_SYS, (), phi, (), budget=4).is_true


def test_forced_value():
    assert forced_value(Bottom(0)).is_false
    assert forced_value(Atom(1, "P", (0,))).is_unknown
    assert forced_value(And(1, Atom(1, "P", (0,)), Bottom(1))).is_false
    assert forced_value(Implies(1, Bottom(1), Atom(1, "P", (0,)))).is_true


def test_eval_tarskian_basics():
    single = ClassicalStructure(
        carrier=frozenset({"a"}),
        signature=Signature({"=": 2}),
        relations={"=": frozenset({("a", "a")})},
    )
    assert eval_tarskian(single, parse_formula(
        "forall x0 (x0 = x0)", Signature({"=": 2})), ())
    empty_p = ClassicalStructure(
        carrier=frozenset({"a"}),
        signature=Signature({"P": 1}),
        relations={"P": frozenset()},
    )
    assert not eval_tarskian(empty_p, parse_formula(
        "exists x0 P(x0)", Signature({"P": 1})), ())


def test_materialize_transposed_leq():
    rel = materialize(NAT_SYS, ll_pointwise_nat(),
                      Atom(2, "<=", (1, 0)), nat_bound=6)
    for (c0, c1), rows in rel.tables.items():
        expected = {(a0, a1) for a0 in range(c0) for a1 in range(c1)
                    if a1 <= a0}
        assert rows == expected
    assert (5, 5) in rel.tables


def test_materialize_bottom_is_empty_everywhere():
    rel = materialize(NAT_SYS, ll_pointwise_nat(), Bottom(1), nat_bound=5)
    assert rel.tables
    assert all(not rows for rows in rel.tables.values())


def test_materialized_negation_is_complement():
    sys = StageSystem(
        index_set=ExplicitPoset.from_closure((0, 1), {(0, 1)}),
        signature=Signature({"P": 1}),
        stage_fn=lambda i: frozenset(range(i + 2)),
        families={"P": OracleFamily(1, lambda x: x % 2 == 0)},
    )
    ll = ll_all(sys.index_set)
    p = Atom(1, "P", (0,))
    notp = Implies(1, p, Bottom(1))
    pos = materialize(sys, ll, p)
    negrel = materialize(sys, ll, notp)
    assert set(pos.tables) == set(negrel.tables)
    for C in pos.tables:
        stage_tuples = set(sys.stage_product(C))
        assert negrel.tables[C] == frozenset(stage_tuples - pos.tables[C])


def test_materialized_relation_is_compatible_under_trivial_ll():
    sys = StageSystem(
        index_set=ExplicitPoset.from_closure((0, 1), {(0, 1)}),
        signature=Signature({"P": 1}),
        stage_fn=lambda i: frozenset(range(i + 2)),
        families={"P": OracleFamily(1, lambda x: x > 0)},
    )
    rel = materialize(sys, ll_all(sys.index_set), Exists(0, Atom(1, "P", (0,))))
    fam = rel.as_family()
    probe = StageSystem(
        index_set=sys.index_set,
        signature=Signature({"D": 0}),
        stage_fn=sys.stage,
        families={"D": fam},
        assignments={"D": frozenset(rel.contexts())},
    )
    report = check_compatibility(probe, samples=200)
    assert report.ok
