"""Stage systems: directed index sets, finite monotone stages, and
compatible relation families, plus the union/cover constructions that move
between stage systems and ordinary single-carrier structures.

Systems are immutable after construction; oracle predicates must be pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .syntax import Signature


class StructureError(ValueError):
    pass


class InfiniteEnumeration(StructureError):
    """Raised when an operation needs to enumerate an unbounded index set."""


# ---------------------------------------------------------------------------
# Index sets
# ---------------------------------------------------------------------------

class IndexSet:
    """Directed preorder of stages.  Subclasses fix the carrier of indices,
    the order, and a canonical total order used to make searches and reports
    deterministic."""

    finite = True

    def leq(self, i, j) -> bool:
        raise NotImplementedError

    def contains(self, i) -> bool:
        raise NotImplementedError

    def iter_all(self):
        """All indices in canonical order (finite index sets only)."""
        raise NotImplementedError

    def sort_key(self, i):
        raise NotImplementedError

    def upper_bound(self, indices):
        """Some index above every element of `indices` (empty -> minimum)."""
        raise NotImplementedError

    def top(self):
        """A greatest index if one exists, else None."""
        return None

    def up_set(self, i) -> frozenset:
        if not self.finite:
            raise InfiniteEnumeration("up-set of an unbounded index set")
        return frozenset(j for j in self.iter_all() if self.leq(i, j))

    def format_index(self, i) -> str:
        return str(i)

    def iter_contexts(self, n: int):
        """All length-n contexts in canonical order (finite only)."""
        if not self.finite:
            raise InfiniteEnumeration("context grid of an unbounded index set")
        return itertools.product(tuple(self.iter_all()), repeat=n)


class Naturals(IndexSet):
    """Indices 0,1,2,... with the usual order; stage i is {0,..,i-1} when
    used through make_nat_system."""

    finite = False

    def leq(self, i, j) -> bool:
        return i <= j

    def contains(self, i) -> bool:
        return isinstance(i, int) and i >= 0

    def iter_all(self):
        raise InfiniteEnumeration("cannot enumerate the naturals")

    def sort_key(self, i):
        return i

    def upper_bound(self, indices):
        indices = list(indices)
        return max(indices) if indices else 0

    def format_index(self, i) -> str:
        return str(i)


class FinitePowersetLattice(IndexSet):
    """Indices are the subsets of a finite carrier, ordered by inclusion.
    Canonical order is by size, then by element positions."""

    def __init__(self, carrier):
        self.carrier = tuple(carrier)
        if not self.carrier:
            raise StructureError("powerset lattice needs a non-empty carrier")
        if len(set(self.carrier)) != len(self.carrier):
            raise StructureError("duplicate carrier elements")
        self._pos = {e: k for k, e in enumerate(self.carrier)}
        self._all = tuple(sorted(
            (frozenset(c) for r in range(len(self.carrier) + 1)
             for c in itertools.combinations(self.carrier, r)),
            key=self._key))

    def _key(self, s):
        return (len(s), tuple(sorted(self._pos[e] for e in s)))

    def leq(self, i, j) -> bool:
        return i <= j

    def contains(self, i) -> bool:
        return isinstance(i, frozenset) and all(e in self._pos for e in i)

    def iter_all(self):
        return iter(self._all)

    def sort_key(self, i):
        return self._key(i)

    def upper_bound(self, indices):
        out = frozenset()
        for i in indices:
            out |= i
        return out

    def top(self):
        return frozenset(self.carrier)

    def format_index(self, i) -> str:
        inner = ",".join(str(e) for e in sorted(i, key=lambda e: self._pos[e]))
        return "{" + inner + "}"


class ExplicitPoset(IndexSet):
    """Finite preorder given by an explicit order table.  Reflexivity,
    transitivity, directedness and non-emptiness are checked eagerly."""

    def __init__(self, elements, leq_pairs):
        self.elements = tuple(elements)
        if not self.elements:
            raise StructureError("index set must be non-empty")
        if len(set(self.elements)) != len(self.elements):
            raise StructureError("duplicate index ids")
        self._pos = {e: k for k, e in enumerate(self.elements)}
        rel = set(leq_pairs)
        for e in self.elements:
            rel.add((e, e))
        for (a, b) in rel:
            if a not in self._pos or b not in self._pos:
                raise StructureError(f"order pair {(a, b)!r} uses unknown index")
        for (a, b) in list(rel):
            for (c, d) in list(rel):
                if b == c and (a, d) not in rel:
                    raise StructureError(
                        f"order not transitive: {a!r} <= {b!r} <= {d!r}")
        self._rel = frozenset(rel)
        for a in self.elements:
            for b in self.elements:
                if not any((a, c) in rel and (b, c) in rel for c in self.elements):
                    raise StructureError(
                        f"index set not directed: {a!r}, {b!r} have no upper bound")

    @classmethod
    def from_closure(cls, elements, leq_pairs):
        """Build after taking the reflexive-transitive closure of the pairs."""
        elements = tuple(elements)
        rel = set(leq_pairs) | {(e, e) for e in elements}
        changed = True
        while changed:
            changed = False
            for (a, b) in list(rel):
                for (c, d) in list(rel):
                    if b == c and (a, d) not in rel:
                        rel.add((a, d))
                        changed = True
        return cls(elements, rel)

    def leq(self, i, j) -> bool:
        return (i, j) in self._rel

    def contains(self, i) -> bool:
        return i in self._pos

    def iter_all(self):
        return iter(self.elements)

    def sort_key(self, i):
        return self._pos[i]

    def upper_bound(self, indices):
        indices = list(indices)
        for c in self.elements:
            if all(self.leq(i, c) for i in indices):
                return c
        raise StructureError("no upper bound found")  # unreachable: directed

    def top(self):
        for c in self.elements:
            if all(self.leq(e, c) for e in self.elements):
                return c
        return None


# ---------------------------------------------------------------------------
# Relation families
# ---------------------------------------------------------------------------

class RelationFamily:
    """A compatible family of relation instances R_C, one per context in the
    symbol's signature assignment set."""

    arity: int

    def value(self, sys: "StageSystem", C: tuple, args: tuple) -> bool:
        raise NotImplementedError


class OracleFamily(RelationFamily):
    """Computable predicate on element tuples; the instance at context C is
    its restriction to M_C.  Compatible by construction."""

    def __init__(self, arity: int, pred):
        self.arity = arity
        self.pred = pred

    def value(self, sys, C, args):
        for k, a in enumerate(args):
            if a not in sys.stage(C[k]):
                return False
        return bool(self.pred(*args))


class TabledFamily(RelationFamily):
    """Explicit per-context tuple tables."""

    def __init__(self, arity: int, tables: dict):
        self.arity = arity
        self.tables = {tuple(C): frozenset(map(tuple, rows))
                       for C, rows in tables.items()}

    def value(self, sys, C, args):
        try:
            return tuple(args) in self.tables[tuple(C)]
        except KeyError:
            raise StructureError(f"no table for context {C!r}")


class UnionTableFamily(RelationFamily):
    """A single union-level tuple table; instances are its restrictions.
    This is the file-format backing and is compatible by construction."""

    def __init__(self, arity: int, rows):
        self.arity = arity
        self.rows = frozenset(map(tuple, rows))

    def value(self, sys, C, args):
        for k, a in enumerate(args):
            if a not in sys.stage(C[k]):
                return False
        return tuple(args) in self.rows


ALL_CONTEXTS = "all"


@dataclass
class StageSystem:
    """A signature-indexed family of finite stages with relation families.

    `assignments[name]` is either ALL_CONTEXTS or a frozenset of contexts;
    it plays the role of the set of declarations R : C.
    """

    index_set: IndexSet
    signature: Signature
    stage_fn: object  # callable index -> frozenset
    families: dict = field(default_factory=dict)
    assignments: dict = field(default_factory=dict)
    element_order: tuple = ()

    def __post_init__(self):
        for name, arity in self.signature.items():
            if name not in self.families:
                raise StructureError(f"missing relation family for {name!r}")
            if self.families[name].arity != arity:
                raise StructureError(f"family arity mismatch for {name!r}")
            assigned = self.assignments.setdefault(name, ALL_CONTEXTS)
            if assigned != ALL_CONTEXTS:
                if not self.index_set.finite:
                    raise StructureError(
                        "explicit signature assignments need a finite index set")
                if not assigned:
                    raise StructureError(
                        f"relation {name!r} needs at least one assignment")
        self._stage_cache: dict = {}
        self._validate()

    def _validate(self):
        iset = self.index_set
        if iset.finite:
            indices = list(iset.iter_all())
            if not any(self.stage(i) for i in indices):
                raise StructureError("at least one stage must be non-empty")
            for i in indices:
                for j in indices:
                    if iset.leq(i, j) and not self.stage(i) <= self.stage(j):
                        raise StructureError(
                            f"stages not monotone: {i!r} <= {j!r}")

    # -- stages -------------------------------------------------------------

    def stage(self, i) -> frozenset:
        try:
            return self._stage_cache[i]
        except KeyError:
            v = frozenset(self.stage_fn(i))
            self._stage_cache[i] = v
            return v

    def element_key(self, e):
        if self.element_order:
            return self.element_order.index(e)
        return e

    def stage_sorted(self, i) -> tuple:
        return tuple(sorted(self.stage(i), key=self.element_key))

    def stage_product(self, C: tuple):
        """M_C in deterministic order."""
        return itertools.product(*(self.stage_sorted(i) for i in C))

    def assignment_holds(self, name: str, C: tuple) -> bool:
        assigned = self.assignments[name]
        if assigned == ALL_CONTEXTS:
            return len(C) == self.signature.arity(name)
        return tuple(C) in assigned

    def rel_value(self, name: str, C: tuple, args: tuple) -> bool:
        if not self.assignment_holds(name, C):
            raise StructureError(f"{name!r} has no assignment at {C!r}")
        return self.families[name].value(self, C, args)

    def contains_assignment_tuple(self, C: tuple, a: tuple) -> bool:
        return len(a) == len(C) and all(
            a[k] in self.stage(C[k]) for k in range(len(C)))


# ---------------------------------------------------------------------------
# Classical single-carrier structures
# ---------------------------------------------------------------------------

@dataclass
class ClassicalStructure:
    carrier: frozenset
    signature: Signature
    relations: dict  # name -> frozenset of tuples
    truncated: bool = False
    element_order: tuple = ()

    def element_key(self, e):
        if self.element_order:
            return self.element_order.index(e)
        return e

    def carrier_sorted(self) -> tuple:
        return tuple(sorted(self.carrier, key=self.element_key))

    def holds(self, name: str, args: tuple) -> bool:
        return tuple(args) in self.relations[name]


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def make_nat_system(relations) -> StageSystem:
    """The system of initial segments of the naturals: stage i is
    {0,..,i-1}.  `relations` maps names to (arity, predicate)."""
    sig = Signature()
    families = {}
    for name, (arity, pred) in relations.items():
        sig.add(name, arity)
        families[name] = OracleFamily(arity, pred)
    return StageSystem(
        index_set=Naturals(),
        signature=sig,
        stage_fn=lambda i: frozenset(range(i)),
        families=families,
    )


def make_powerset_system(carrier, membership, equality=None) -> StageSystem:
    """Stage system over the lattice of subsets of `carrier`; the stage of a
    subset is the subset itself.  `membership` is a set of (a, b) pairs with
    a-in-b; equality defaults to the identity table."""
    carrier = tuple(carrier)
    if not carrier:
        raise StructureError("empty carrier")
    member_pairs = frozenset(map(tuple, membership))
    for (a, b) in member_pairs:
        if a not in carrier or b not in carrier:
            raise StructureError(f"membership row {(a, b)!r} outside carrier")
    if equality is None:
        eq_pairs = frozenset((e, e) for e in carrier)
    else:
        eq_pairs = frozenset(map(tuple, equality))
        for (a, b) in eq_pairs:
            if a not in carrier or b not in carrier:
                raise StructureError(f"equality row {(a, b)!r} outside carrier")
    sig = Signature({"in": 2, "=": 2})
    families = {
        "in": OracleFamily(2, lambda a, b: (a, b) in member_pairs),
        "=": OracleFamily(2, lambda a, b: (a, b) in eq_pairs),
    }
    return StageSystem(
        index_set=FinitePowersetLattice(carrier),
        signature=sig,
        stage_fn=lambda i: frozenset(i),
        families=families,
        element_order=carrier,
    )


def truncated_extension(sys: StageSystem, rel: str, element, stage) -> frozenset:
    """The state of `element` under a binary relation at a stage: all b in
    the stage with (b, element) in the relation."""
    return frozenset(
        b for b in sys.stage(stage)
        if sys.families[rel].value(sys, (stage, stage), (b, element)))


def union_structure(sys: StageSystem, cutoff=None) -> ClassicalStructure:
    """Union of all stages with union relations.  For unbounded index sets a
    cutoff index is required and the result is marked truncated."""
    iset = sys.index_set
    if iset.finite:
        carrier = frozenset().union(*(sys.stage(i) for i in iset.iter_all()))
        truncated = False
    else:
        if cutoff is None:
            raise InfiniteEnumeration(
                "union of an unbounded system needs a cutoff")
        carrier = sys.stage(cutoff)
        truncated = True
    order = tuple(sorted(carrier, key=sys.element_key))
    relations = {}
    for name, arity in sys.signature.items():
        fam = sys.families[name]
        rows = set()
        if isinstance(fam, TabledFamily):
            for C, table in fam.tables.items():
                rows |= {t for t in table
                         if all(e in carrier for e in t)}
        else:
            top = iset.top() if iset.finite else cutoff
            ctx = (top,) * arity
            for args in itertools.product(order, repeat=arity):
                if fam.value(sys, ctx, args):
                    rows.add(args)
        relations[name] = frozenset(rows)
    return ClassicalStructure(
        carrier=carrier, signature=sys.signature, relations=relations,
        truncated=truncated, element_order=order)


def cover_structure(m: ClassicalStructure, cover) -> StageSystem:
    """Stage system induced by a directed cover of a classical structure,
    ordered by stage inclusion."""
    stages = [frozenset(s) for s in cover]
    if not stages:
        raise StructureError("empty cover")
    union = frozenset().union(*stages)
    if union != m.carrier:
        raise StructureError("cover union differs from the carrier")
    for a in stages:
        for b in stages:
            if not any(a <= c and b <= c for c in stages):
                raise StructureError("cover is not directed")
    ids = tuple(f"c{k}" for k in range(len(stages)))
    by_id = dict(zip(ids, stages))
    pairs = {(x, y) for x in ids for y in ids if by_id[x] <= by_id[y]}
    iset = ExplicitPoset(ids, pairs)
    families = {
        name: UnionTableFamily(m.signature.arity(name), rows)
        for name, rows in m.relations.items()
    }
    return StageSystem(
        index_set=iset,
        signature=m.signature,
        stage_fn=lambda i: by_id[i],
        families=families,
        element_order=m.element_order or tuple(sorted(m.carrier, key=str)),
    )


# ---------------------------------------------------------------------------
# Compatibility checking
# ---------------------------------------------------------------------------

@dataclass
class CompatReport:
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def check_compatibility(sys: StageSystem, samples: int = 1000,
                        seed: int = 0, nat_bound: int = 12) -> CompatReport:
    """Check R_C(a) <-> R_C'(a) on shared tuples.  Exhaustive when the pair
    grid fits in `samples`, otherwise a seeded sample.  Violations are report
    content, not faults."""
    import random
    rng = random.Random(seed)
    iset = sys.index_set
    checked = 0
    violations = []
    for name, arity in sys.signature.items():
        if iset.finite:
            if sys.assignments[name] == ALL_CONTEXTS:
                contexts = list(iset.iter_contexts(arity))
            else:
                contexts = sorted(sys.assignments[name],
                                  key=lambda C: tuple(iset.sort_key(i) for i in C))
        else:
            grid = range(nat_bound)
            contexts = list(itertools.product(grid, repeat=arity))
        total = len(contexts) ** 2
        if total <= samples:
            pairs = ((C, D) for C in contexts for D in contexts)
        else:
            pairs = ((rng.choice(contexts), rng.choice(contexts))
                     for _ in range(samples))
        for C, D in pairs:
            shared = [
                tuple(sorted(sys.stage(c) & sys.stage(d), key=sys.element_key))
                for c, d in zip(C, D)
            ]
            for args in itertools.product(*shared):
                vc = sys.rel_value(name, C, args)
                vd = sys.rel_value(name, D, args)
                checked += 1
                if vc != vd:
                    violations.append((name, C, D, args, vc, vd))
    return CompatReport(checked=checked, violations=violations)
