import itertools

import pytest

from stagesem.adequacy import (
    BRANCH_NO_WITNESS, BRANCH_UNKNOWN, BRANCH_WITNESS, check_adequate,
    finite_probes, grid_probes, horizon, ll_T, witness_set,
)
from stagesem.demos import (
    I0, I1, I2, I3, J_UNION, PERFECT_SIG, ZFC_SIG, perfect_system, zfc_axioms,
    zfc_system,
)
from stagesem.filters import (
    AllIndices, ExplicitIndices, UnknownBeyond, UpFrom, check_shortening,
    in_Dn, ll_pointwise_nat,
)
from stagesem.syntax import (
    Exists, Atom, Forall, Signature, parse_formula, MODE_FULL,
    MODE_NEGATIVE_ONLY,
)
from stagesem.system import ExplicitPoset, Naturals, OracleFamily, StageSystem


EXISTS_R = parse_formula("exists x1 R(x0, x1)", PERFECT_SIG)


def test_witness_sets_perfect_demo():
    sys = perfect_system()
    r7, b7 = witness_set(sys, EXISTS_R, (7,), (8,), budget=64)
    assert r7 == UpFrom(22)
    assert b7 == BRANCH_WITNESS
    r0, b0 = witness_set(sys, EXISTS_R, (0,), (8,), budget=64)
    assert r0 == UpFrom(7)
    assert b0 == BRANCH_WITNESS


def test_witness_set_naive_oracle_agreement():
    # independent brute force: scan stage/witness pairs directly
    def perfect(n):
        return n > 1 and sum(d for d in range(1, n) if n % d == 0) == n

    def naive_least_stage(a0, bound=64):
        for i in range(bound):
            if any(perfect(a0 + b) for b in range(i)):
                return i
        return None

    sys = perfect_system()
    for a0 in range(8):
        expected = naive_least_stage(a0)
        got, _ = witness_set(sys, EXISTS_R, (a0,), (8,), budget=64)
        assert got == UpFrom(expected)


def test_witness_set_unknown_then_resolved_by_budget():
    sys = perfect_system()
    r, branch = witness_set(sys, EXISTS_R, (7,), (8,), budget=10)
    assert isinstance(r, UnknownBeyond)
    assert branch == BRANCH_UNKNOWN
    r2, branch2 = witness_set(sys, EXISTS_R, (7,), (8,), budget=64)
    assert r2 == UpFrom(22)
    assert branch2 == BRANCH_WITNESS


def test_witness_set_no_witness_certificates():
    sys = perfect_system()
    falsy = parse_formula("exists x1 (R(x0, x1) & false)", PERFECT_SIG)
    r, branch = witness_set(sys, falsy, (3,), (8,), budget=8)
    assert r == AllIndices()
    assert branch == BRANCH_NO_WITNESS
    hopeless = parse_formula("exists x1 R(x0, x1)", PERFECT_SIG)
    r2, branch2 = witness_set(sys, hopeless, (7,), (8,), budget=5,
                              certified_no_witness=True)
    assert r2 == AllIndices()
    assert branch2 == BRANCH_NO_WITNESS


def test_ll_T_perfect_memberships():
    sys = perfect_system()
    llt = ll_T(sys, [EXISTS_R], budget=64)
    assert llt.holds((8,), 22).is_true
    assert llt.holds((8,), 21).is_false
    assert llt.section((8,)) == UpFrom(22)
    assert horizon(llt, (8,)) == (22, "exact")
    # generated projections: every level-1 index qualifies
    assert llt.is_context((3,)).is_true
    # free extension above the base level
    assert llt.holds((8, 22), 0).is_true


def test_ll_T_empty_theory_is_trivial():
    sys = perfect_system()
    llt = ll_T(sys, [], budget=8)
    assert llt.holds((4, 1), 0).is_true
    assert horizon(llt, ()) == (0, "exact")


def test_ll_T_budget_monotone():
    sys = perfect_system()
    llt = ll_T(sys, [EXISTS_R], budget=10)
    assert llt.holds((8,), 22).is_unknown
    llt.raise_budget(64)
    assert llt.holds((8,), 22).is_true
    assert llt.holds((8,), 21).is_false


def test_zfc_chain_memberships():
    sys = zfc_system()
    llt = ll_T(sys, zfc_axioms(), mode=MODE_NEGATIVE_ONLY)
    assert llt.holds((), I0).is_true
    assert llt.holds((I0,), I1).is_true
    assert llt.holds((I0, I1), I2).is_true
    assert llt.holds((I0, I1, I2), J_UNION).is_true
    # the fourth listed stage lacks the witness Pw for the pair {0, Pw}
    # against w, so the membership computes false; adding Pw repairs it
    assert llt.holds((I0, I1, I2), I3).is_false
    assert llt.holds((I0, I1, I2), I3 | {"Pw"}).is_true
    assert llt.holds((I0, I1, I2), frozenset({"0", "w", "Pw"})).is_true


def test_zfc_horizons_match_listed_stages():
    sys = zfc_system()
    llt = ll_T(sys, zfc_axioms(), mode=MODE_NEGATIVE_ONLY)
    assert horizon(llt, (I0,)) == (I1, "exact")
    assert horizon(llt, (I0, I1)) == (I2, "exact")
    assert horizon(llt, (I0, I1, I2)) == (frozenset({"0", "w", "Pw"}), "exact")


def test_zfc_witness_sets_match_brute_force():
    sys = zfc_system()
    llt = ll_T(sys, zfc_axioms(), mode=MODE_NEGATIVE_ONLY)
    from stagesem.semantics import _eval_m_exact
    carrier = sorted(sys.stage(frozenset(sys.index_set.carrier)))
    for src in llt.sources:
        k = src.arity
        if k == 0:
            grids = [()]
            ctx = ()
        elif k == 2:
            ctx = (I0, I1)
            grids = list(itertools.product(sorted(I0), sorted(I1)))
        else:
            continue
        for a in grids:
            got, _ = witness_set(sys, src, a, ctx)
            witnesses = {b for b in carrier
                         if _eval_m_exact(sys, src.body, tuple(a) + (b,))}
            if not witnesses:
                expected = AllIndices()
            else:
                expected = ExplicitIndices(frozenset(
                    i for i in sys.index_set.iter_all() if i & witnesses))
            assert got == expected


def test_check_adequate_pointwise_violations_explain_divergence():
    sys = StageSystem(
        index_set=Naturals(),
        signature=Signature({"<=": 2}),
        stage_fn=lambda i: frozenset(range(i)),
        families={"<=": OracleFamily(2, lambda a, b: a <= b)},
    )
    T = [Forall(1, Atom(2, "<=", (1, 0)))]
    llt = ll_T(sys, T, mode=MODE_FULL, budget=30)
    report = check_adequate(ll_pointwise_nat(), llt, grid_probes(6, 2))
    assert not report.ok
    assert ((1,), 1) in report.violations


def test_check_adequate_reflexive_and_restriction():
    sys = zfc_system()
    llt = ll_T(sys, zfc_axioms(), mode=MODE_NEGATIVE_ONLY)
    probes = [((), I0), ((I0,), I1), ((I0, I1), I2)]
    assert check_adequate(llt, llt, probes).ok
    sub = frozenset({I0, I1, I2, J_UNION})
    sub_iset = ExplicitPoset(
        tuple(sorted(sub, key=sys.index_set.sort_key)),
        {(a, b) for a in sub for b in sub if a <= b})
    restricted = llt.restricted(sub, sub_iset)
    pairs = [(C, i) for C, i in
             [((), I0), ((I0,), I1), ((I0, I1), I2), ((I0, I1, I2), J_UNION)]]
    report = check_adequate(restricted, llt, pairs)
    assert report.ok and report.checked == 4


def test_ll_R_indefinitely_large_on_finite_instances():
    # single-relation systems with a top: the generated witness relation is
    # an indefinitely large <<-relation (checked levels 0..3)
    iset = ExplicitPoset.from_closure((0, 1, 2), {(0, 1), (1, 2)})
    sys = StageSystem(
        index_set=iset,
        signature=Signature({"P": 2}),
        stage_fn=lambda i: frozenset(range(i + 1)),
        families={"P": OracleFamily(2, lambda a, b: (a + b) % 2 == 0)},
    )
    phi = parse_formula("exists x1 P(x0, x1)", Signature({"P": 2}))
    ll_r = ll_T(sys, [phi])
    for n in range(4):
        assert in_Dn(ll_r.family, n, iset).is_true
    assert check_shortening(ll_r, 3) == []


def test_ll_T_adequate_and_indefinitely_large_small_instances():
    import random
    from stagesem.corpus import random_formula_set, random_system
    rng = random.Random(3)
    for _ in range(6):
        sys = random_system(rng, max_stages=3, max_elements=3, max_relations=2)
        T = random_formula_set(rng, sys.signature, count=2, max_depth=2)
        llt = ll_T(sys, T, mode=MODE_FULL)
        for n in range(3):
            assert not in_Dn(llt.family, n, sys.index_set).is_false
        probes = list(finite_probes(sys.index_set, 2))
        assert check_adequate(llt, llt, probes).ok
        assert check_shortening(llt, 3) == []


def test_growing_lower_bound_theories_have_divergent_horizons():
    bounds = range(24)
    sys = StageSystem(
        index_set=Naturals(),
        signature=Signature({f"ge{n}": 1 for n in bounds}),
        stage_fn=lambda i: frozenset(range(i)),
        families={f"ge{n}": OracleFamily(1, (lambda n: lambda a: a >= n)(n))
                  for n in bounds},
    )
    horizons = []
    for cutoff in (5, 10, 20):
        T = [Exists(0, Atom(1, f"ge{n}", (0,))) for n in range(cutoff + 1)]
        llt = ll_T(sys, T, budget=64)
        h, status = horizon(llt, ())
        assert status == "exact"
        horizons.append(h)
        assert h == cutoff + 1
    assert horizons == sorted(horizons) and len(set(horizons)) == 3


def test_branch_records_are_kept():
    sys = perfect_system()
    llt = ll_T(sys, [EXISTS_R], budget=64)
    llt.holds((8,), 22)
    assert llt.branch_record(EXISTS_R, (8,), (7,)) == BRANCH_WITNESS
