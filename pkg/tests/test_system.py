import pytest

from stagesem.syntax import Signature
from stagesem.system import (
    ALL_CONTEXTS, ClassicalStructure, ExplicitPoset, FinitePowersetLattice,
    Naturals, OracleFamily, StageSystem, StructureError, TabledFamily,
    check_compatibility, cover_structure, make_nat_system,
    make_powerset_system, truncated_extension, union_structure,
    InfiniteEnumeration,
)


def perfect(n: int) -> bool:
    return n > 1 and sum(d for d in range(1, n) if n % d == 0) == n


NAT_LEQ = make_nat_system({"<=": (2, lambda a, b: a <= b)})
PERFECT = make_nat_system({"R": (2, lambda a, b: perfect(a + b))})

ZFC_CARRIER = ("0", "1", "2", "w", "Pw", "0Pw", "w1", "wPw")
ZFC_MEMBERS = {
    "0": (),
    "1": ("0",),
    "2": ("0", "1"),
    "w": ("0", "1", "2"),
    "Pw": ("0", "1", "2", "w"),
    "0Pw": ("0", "Pw"),
    "w1": ("w", "1"),
    "wPw": ("w", "Pw"),
}
ZFC_MEMBERSHIP = {(a, b) for b, elems in ZFC_MEMBERS.items() for a in elems}


def zfc_system():
    return make_powerset_system(ZFC_CARRIER, ZFC_MEMBERSHIP)


def test_nat_stages_and_restriction():
    assert NAT_LEQ.stage(3) == frozenset({0, 1, 2})
    table = {
        args
        for args in NAT_LEQ.stage_product((2, 3))
        if NAT_LEQ.rel_value("<=", (2, 3), args)
    }
    assert table == {(0, 0), (0, 1), (0, 2), (1, 1), (1, 2)}


def test_perfect_sum_family_instance():
    assert PERFECT.rel_value("R", (8, 22), (7, 21))
    assert not PERFECT.rel_value("R", (8, 22), (7, 20))
    # (7, 21) is outside M_(8, 21)
    assert not PERFECT.rel_value("R", (8, 21), (7, 21))


def test_empty_signature_system_is_accepted():
    sys0 = make_nat_system({})
    assert sys0.stage(2) == frozenset({0, 1})


def test_powerset_stage_is_the_subset():
    sys = zfc_system()
    i2 = frozenset({"0", "w", "2", "0Pw", "w1", "wPw"})
    assert sys.stage(i2) == i2
    assert sys.rel_value("in", (i2, i2), ("0", "w"))
    assert not sys.rel_value("in", (i2, i2), ("w", "0"))


def test_truncated_extension_of_omega():
    sys = zfc_system()
    i2 = frozenset({"0", "w", "2", "0Pw", "w1", "wPw"})
    i3 = frozenset({"0", "1", "w"})
    assert truncated_extension(sys, "in", "w", i2) == {"0", "2"}
    assert truncated_extension(sys, "in", "w", i3) == {"0", "1"}


def test_powerset_empty_carrier_rejected():
    with pytest.raises(StructureError):
        make_powerset_system((), set())


def test_union_structure_powerset():
    sys = zfc_system()
    m = union_structure(sys)
    assert m.carrier == frozenset(ZFC_CARRIER)
    assert not m.truncated
    assert m.holds("in", ("0", "w"))
    assert not m.holds("in", ("w", "w"))
    assert m.holds("=", ("w", "w"))


def test_union_structure_naturals_needs_cutoff():
    with pytest.raises(InfiniteEnumeration):
        union_structure(NAT_LEQ)
    m = union_structure(NAT_LEQ, cutoff=30)
    assert m.carrier == frozenset(range(30))
    assert m.truncated


def test_union_of_singleton_explicit_poset():
    iset = ExplicitPoset(("s",), set())
    sys = StageSystem(
        index_set=iset,
        signature=Signature({"P": 1}),
        stage_fn=lambda i: frozenset({"a"}),
        families={"P": OracleFamily(1, lambda x: True)},
    )
    assert union_structure(sys).carrier == frozenset({"a"})


def make_classical_ab():
    return ClassicalStructure(
        carrier=frozenset({"a", "b"}),
        signature=Signature({"P": 1}),
        relations={"P": frozenset({("a",)})},
        element_order=("a", "b"),
    )


def test_cover_structure_chain():
    m = make_classical_ab()
    sys = cover_structure(m, [{"a"}, {"a", "b"}])
    ids = tuple(sys.index_set.iter_all())
    assert len(ids) == 2
    assert sys.index_set.leq(ids[0], ids[1])
    assert sys.stage(ids[0]) == {"a"}


def test_cover_structure_not_directed():
    m = make_classical_ab()
    with pytest.raises(StructureError):
        cover_structure(m, [{"a"}, {"b"}])


def test_cover_with_all_subsets_matches_lattice():
    m = make_classical_ab()
    subsets = [set(), {"a"}, {"b"}, {"a", "b"}]
    sys = cover_structure(m, subsets)
    lattice = FinitePowersetLattice(("a", "b"))
    ids = list(sys.index_set.iter_all())
    assert len(ids) == len(list(lattice.iter_all()))
    le = sum(1 for i in ids for j in ids if sys.index_set.leq(i, j))
    le_lattice = sum(1 for i in lattice.iter_all() for j in lattice.iter_all()
                     if lattice.leq(i, j))
    assert le == le_lattice


def test_cover_then_union_roundtrip():
    m = make_classical_ab()
    sys = cover_structure(m, [{"a"}, {"a", "b"}])
    back = union_structure(sys)
    assert back.carrier == m.carrier
    assert back.relations == m.relations


def test_monotone_violation_detected():
    iset = ExplicitPoset(("lo", "hi"), {("lo", "hi")})
    with pytest.raises(StructureError):
        StageSystem(
            index_set=iset,
            signature=Signature({}),
            stage_fn=lambda i: frozenset({"a"} if i == "lo" else set()),
            families={},
        )


def test_explicit_poset_invariants():
    with pytest.raises(StructureError):
        ExplicitPoset((), set())
    with pytest.raises(StructureError):
        ExplicitPoset(("a", "b"), set())  # not directed
    with pytest.raises(StructureError):
        ExplicitPoset(("a", "b", "c"),
                      {("a", "b"), ("b", "c"), ("a", "c"), ("b", "a"),
                       ("c", "a")})  # transitivity would force (c, b)
    chain = ExplicitPoset.from_closure(("a", "b", "c"), {("a", "b"), ("b", "c")})
    assert chain.leq("a", "c")
    assert chain.top() == "c"


def test_compatibility_clean_families():
    report = check_compatibility(PERFECT, samples=400, nat_bound=8)
    assert report.ok
    report = check_compatibility(zfc_system(), samples=200)
    assert report.ok


def test_compatibility_detects_corruption():
    iset = ExplicitPoset.from_closure(("lo", "hi"), {("lo", "hi")})
    tables = {
        ("lo",): {("a",)},
        ("hi",): set(),  # drops ("a",): incompatible with the instance at lo
    }
    sys = StageSystem(
        index_set=iset,
        signature=Signature({"P": 1}),
        stage_fn=lambda i: frozenset({"a"} if i == "lo" else {"a", "b"}),
        families={"P": TabledFamily(1, tables)},
    )
    report = check_compatibility(sys, samples=100)
    assert not report.ok
    assert any(v[0] == "P" and v[3] == ("a",) for v in report.violations)


def test_naturals_basics():
    n = Naturals()
    assert n.leq(3, 7)
    assert n.upper_bound([2, 9, 4]) == 9
    assert not n.finite


def test_lattice_canonical_order():
    lattice = FinitePowersetLattice(("a", "b"))
    order = list(lattice.iter_all())
    assert order[0] == frozenset()
    assert order[-1] == frozenset({"a", "b"})
    assert lattice.format_index(frozenset({"b", "a"})) == "{a,b}"
