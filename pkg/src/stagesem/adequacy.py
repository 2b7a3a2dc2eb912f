"""Witness sets and the adequate relation they generate.

For an existential from the hat-closure of a formula set, the stages that
contain a witness for a fixed assignment form an upward-closed set of
indices (all of them when no witness exists anywhere, so the set is never
empty).  Intersecting those sets over all assignments of a context gives
the base level of a generated relation; intersecting over all the
existentials gives the relation called ll_T here.  A relation is adequate
for T when it is a subset of ll_T.

Witness queries are memoized per (existential, context); the cache records
the budget it was computed at and is recomputed when a larger budget
arrives, so raising the budget can only resolve Unknown answers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .filters import (AllFamily, AllIndices, EmptyIndices, ExplicitIndices,
                      GeneratedFamily, IndexSetRepr, IntersectionFamily,
                      LLRelation, SectionMap, UnknownBeyond, UpFrom,
                      repr_intersect, repr_min)
from .semantics import _eval_m_exact, eval_m, forced_value
from .syntax import Exists, Formula, FormulaSet, hat_closure, pretty, MODE_FULL
from .system import StageSystem
from .threeval import TRUE, TruthValue, unknown

BRANCH_WITNESS = "witness-found"
BRANCH_NO_WITNESS = "no-witness-certified"
BRANCH_UNKNOWN = "unknown"


def witness_set(sys: StageSystem, exists_phi: Formula, a: tuple, C: tuple,
                budget: int | None = None,
                certified_no_witness: bool = False):
    """The stages holding a witness for the matrix of `exists_phi` at the
    assignment a : C, as (representation, branch).

    Finite index sets are computed exhaustively.  Over the naturals the
    result is up-from the least witness stage when the search succeeds
    within budget; the everything branch needs a certificate (a forced
    false matrix, or the caller's `certified_no_witness`)."""
    if not isinstance(exists_phi, Exists):
        raise ValueError("witness sets are defined for existential formulas")
    matrix = exists_phi.body
    C = tuple(C)
    a = tuple(a)
    if len(C) + 1 != matrix.arity or len(a) != len(C):
        raise ValueError("context/assignment length mismatch")
    if not sys.contains_assignment_tuple(C, a):
        raise ValueError("assignment outside the context stages")
    iset = sys.index_set
    if iset.finite:
        union_sorted = sorted(
            frozenset().union(*(sys.stage(i) for i in iset.iter_all())),
            key=sys.element_key)
        witnesses = frozenset(
            b for b in union_sorted if _eval_m_exact(sys, matrix, a + (b,)))
        if not witnesses:
            return AllIndices(), BRANCH_NO_WITNESS
        members = frozenset(
            i for i in iset.iter_all() if sys.stage(i) & witnesses)
        return ExplicitIndices(members), BRANCH_WITNESS
    if budget is None:
        raise ValueError("witness search over the naturals needs a budget")
    if forced_value(matrix).is_false:
        return AllIndices(), BRANCH_NO_WITNESS
    saw_unknown = False
    for b in range(budget):
        v = eval_m(sys, C + (budget,), matrix, a + (b,), budget=budget)
        if v.is_true:
            if saw_unknown:
                return (UnknownBeyond(budget=budget, known=UpFrom(b + 1)),
                        BRANCH_UNKNOWN)
            return UpFrom(b + 1), BRANCH_WITNESS
        if v.is_unknown:
            saw_unknown = True
    if certified_no_witness:
        return AllIndices(), BRANCH_NO_WITNESS
    return UnknownBeyond(budget=budget), BRANCH_UNKNOWN


class AdequateRelation(LLRelation):
    """The computed relation ll_T, queryable as an LLRelation.  Each
    existential of the hat-closure contributes a generated family whose
    base sections are memoized witness-set intersections."""

    def __init__(self, sys: StageSystem, T, mode: str = MODE_FULL,
                 budget: int | None = None):
        self.sys = sys
        self.T = FormulaSet(T)
        self.mode = mode
        self.budget = budget
        self.hat = hat_closure(self.T, mode)
        self.sources = tuple(
            phi for phi in self.hat if isinstance(phi, Exists))
        self._section_cache: dict = {}
        self._branches: dict = {}
        iset = sys.index_set
        children = []
        self._section_maps = []
        for idx, src in enumerate(self.sources):
            base_len = src.arity + 1
            base = SectionMap(
                base_len,
                (lambda P, _idx=idx: self._base_section(_idx, P)),
                iset,
                sections_nonempty=TRUE,
            )
            self._section_maps.append(base)
            children.append(GeneratedFamily(base, iset))
        family = IntersectionFamily(children, iset) if children else AllFamily()
        super().__init__(family, iset, provenance="computed")

    def _base_section(self, idx: int, P: tuple) -> IndexSetRepr:
        key = (idx, tuple(P))
        cached = self._section_cache.get(key)
        if cached is not None:
            budget_at, repr_ = cached
            if budget_at == self.budget or not isinstance(repr_, UnknownBeyond):
                return repr_
        src = self.sources[idx]
        out: IndexSetRepr = AllIndices()
        for a in self.sys.stage_product(P):
            repr_, branch = witness_set(self.sys, src, a, P, budget=self.budget)
            self._branches[(idx, tuple(P), tuple(a))] = branch
            out = repr_intersect(out, repr_, self.iset)
            if isinstance(out, EmptyIndices):
                break
        self._section_cache[key] = (self.budget, out)
        return out

    def raise_budget(self, budget: int):
        if self.budget is not None and budget > self.budget:
            self.budget = budget

    def branch_record(self, source: Formula, C: tuple, a: tuple):
        idx = self.sources.index(source)
        return self._branches.get((idx, tuple(C), tuple(a)))

    def describe_sources(self) -> list:
        return [pretty(src) for src in self.sources]


def ll_T(sys: StageSystem, T, mode: str = MODE_FULL,
         budget: int | None = None) -> AdequateRelation:
    return AdequateRelation(sys, T, mode=mode, budget=budget)


def horizon(llT: LLRelation, C: tuple):
    """(least index above C, status): status "exact", "none" or "unknown"."""
    section = llT.section(tuple(C))
    return repr_min(section, llT.iset)


@dataclass
class AdequacyReport:
    checked: int
    violations: list
    unknowns: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self, fmt) -> list:
        out = [f"checked {self.checked} memberships"]
        for C, i in self.violations:
            ctx = "(" + ",".join(fmt(x) for x in C) + ")"
            out.append(f"violation: {ctx} << {fmt(i)} is not below ll_T")
        for C, i in self.unknowns:
            ctx = "(" + ",".join(fmt(x) for x in C) + ")"
            out.append(f"unknown: {ctx} << {fmt(i)} undecided")
        out.append(f"{len(self.violations)} violations")
        return out


def check_adequate(ll: LLRelation, llT: LLRelation, probes) -> AdequacyReport:
    """For each probed (C, i) with C << i in `ll`, verify the membership in
    `llT`.  Violations and unknowns are report content, not faults."""
    checked = 0
    violations = []
    unknowns = []
    for C, i in probes:
        C = tuple(C)
        if not ll.holds(C, i).is_true:
            continue
        checked += 1
        v = llT.holds(C, i)
        if v.is_false:
            violations.append((C, i))
        elif v.is_unknown:
            unknowns.append((C, i))
    return AdequacyReport(checked=checked, violations=violations,
                          unknowns=unknowns)


def finite_probes(iset, max_len: int):
    """All (C, i) pairs over a finite index set with len(C) <= max_len."""
    for n in range(max_len + 1):
        for C in iset.iter_contexts(n):
            for i in iset.iter_all():
                yield C, i


def grid_probes(bound: int, max_len: int):
    """Context/index pairs over an initial segment of the naturals."""
    import itertools
    for n in range(max_len + 1):
        for C in itertools.product(range(bound), repeat=n):
            for i in range(bound):
                yield C, i
