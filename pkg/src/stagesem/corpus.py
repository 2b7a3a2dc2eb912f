"""Seeded random stage systems and formulas for differential testing.

Finite directed preorders always have a greatest element, so the generator
forces one; stages grow monotonically by construction and relations are
restrictions of a random union-level table, hence compatible.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .adequacy import ll_T
from .declarations import SearchInconclusive, derive
from .semantics import eval_ll, eval_m, eval_tarskian, _union_cached
from .syntax import (And, Atom, Bottom, Exists, Forall, Formula, Implies, Or,
                     Signature, pretty, MODE_FULL)
from .system import ExplicitPoset, StageSystem, UnionTableFamily


def random_system(rng: random.Random, max_stages: int = 4,
                  max_elements: int = 5, max_relations: int = 2) -> StageSystem:
    n_stages = rng.randint(1, max_stages)
    ids = tuple(range(n_stages))
    pairs = set()
    for a in ids:
        for b in ids:
            if a < b and rng.random() < 0.4:
                pairs.add((a, b))
    top = ids[-1]
    for a in ids[:-1]:
        pairs.add((a, top))
    iset = ExplicitPoset.from_closure(ids, pairs)

    pool = tuple(f"e{k}" for k in range(rng.randint(1, max_elements)))
    birth = {i: set() for i in ids}
    for e in pool:
        birth[rng.choice(ids)].add(e)
    if not any(birth.values()):
        birth[ids[0]].add(pool[0])
    stages = {
        i: frozenset().union(*(birth[j] for j in ids if iset.leq(j, i)))
        for i in ids
    }
    if not stages[top]:
        stages[top] = frozenset({pool[0]})

    union = sorted(stages[top])
    sig = Signature()
    families = {}
    for r in range(rng.randint(1, max_relations)):
        name = f"R{r}"
        arity = rng.choice((1, 2))
        sig.add(name, arity)
        rows = {t for t in itertools.product(union, repeat=arity)
                if rng.random() < 0.5}
        families[name] = UnionTableFamily(arity, rows)
    return StageSystem(
        index_set=iset,
        signature=sig,
        stage_fn=stages.__getitem__,
        families=families,
        element_order=tuple(union),
    )


def random_formula(rng: random.Random, sig: Signature, arity: int,
                   depth: int) -> Formula:
    choices = []
    atoms = [(name, a) for name, a in sig.items() if a == 0 or arity > 0]
    if depth == 0:
        choices = ["atom"] * 3 + ["bottom"]
    else:
        choices = ["atom", "atom", "bottom", "implies", "and", "or",
                   "forall", "exists", "forall", "exists"]
    kind = rng.choice(choices)
    if kind == "atom" and atoms:
        name, rel_arity = rng.choice(atoms)
        if rel_arity > 0 and arity == 0:
            kind = "bottom"
        else:
            args = tuple(rng.randrange(arity) for _ in range(rel_arity))
            return Atom(arity, name, args)
    if kind == "bottom" or depth == 0:
        return Bottom(arity)
    if kind in ("implies", "and", "or"):
        cls = {"implies": Implies, "and": And, "or": Or}[kind]
        return cls(arity,
                   random_formula(rng, sig, arity, depth - 1),
                   random_formula(rng, sig, arity, depth - 1))
    cls = Forall if kind == "forall" else Exists
    return cls(arity, random_formula(rng, sig, arity + 1, depth - 1))


def random_formula_set(rng: random.Random, sig: Signature, count: int = 3,
                       max_arity: int = 2, max_depth: int = 3) -> list:
    out = []
    for _ in range(count):
        arity = rng.randint(0, max_arity)
        depth = rng.randint(1, max_depth)
        out.append(random_formula(rng, sig, arity, depth))
    return out


@dataclass
class CoincidenceReport:
    systems: int = 0
    derivations: int = 0
    comparisons: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_coincidence(sys: StageSystem, T, report: CoincidenceReport,
                      budget: int = 16):
    """Compare the declaration-based evaluation with the increasing-carrier
    one and the classical one on the union, over every derivable context
    and assignment.  The relation used is the computed ll_T, which is
    adequate by construction."""
    llt = ll_T(sys, T, mode=MODE_FULL, budget=budget)
    union = _union_cached(sys)
    report.systems += 1
    for phi in T:
        for C in sys.index_set.iter_contexts(phi.arity):
            if not llt.is_context(C).is_true:
                continue
            try:
                d = derive(sys, llt, C, phi, budget=budget)
            except SearchInconclusive:
                continue
            if d is None:
                continue
            report.derivations += 1
            for a in sys.stage_product(C):
                v_ll = eval_ll(sys, d, a)
                v_m = eval_m(sys, C, phi, a)
                v_t = eval_tarskian(union, phi, a)
                report.comparisons += 1
                if not (v_ll.is_classical and v_m.is_classical
                        and v_ll == v_m and v_m.is_true == v_t):
                    report.mismatches.append(
                        (pretty(phi), C, a, v_ll, v_m, v_t))
    return llt


def run_coincidence_suite(seed: int, systems: int = 50, max_stages: int = 4,
                          max_elements: int = 5, max_relations: int = 2,
                          max_depth: int = 3,
                          formulas_per_system: int = 3) -> CoincidenceReport:
    rng = random.Random(seed)
    report = CoincidenceReport()
    for _ in range(systems):
        sys_ = random_system(rng, max_stages, max_elements, max_relations)
        T = random_formula_set(rng, sys_.signature,
                               count=formulas_per_system, max_depth=max_depth)
        check_coincidence(sys_, T, report)
    return report
