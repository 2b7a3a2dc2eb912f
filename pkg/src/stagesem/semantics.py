"""The interpreters.

* eval_ll: evaluation along a state declaration; each quantifier checks the
  single stage recorded in the derivation (audit mode samples further
  stages from the <<-section and reports divergences).
* eval_m: simulates the ordinary interpretation on the increasing carrier;
  exact on finite index sets, budget-bounded and three-valued over the
  naturals.
* eval_tarskian: textbook recursion on a single-carrier structure, kept as
  the independent oracle for differential checks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .declarations import (DAtom, DBinary, DBottom, DQuant, Derivation,
                           SearchInconclusive, Strategy, derive)
from .filters import LLRelation, UnknownBeyond, repr_iter
from .syntax import (And, Atom, Bottom, Exists, Forall, Formula, Implies, Or,
                     pretty)
from .system import (ClassicalStructure, OracleFamily, StageSystem,
                     TabledFamily, UnionTableFamily, union_structure)
from .threeval import (FALSE, TRUE, TruthValue, tv, tv_and, tv_implies,
                       tv_not, tv_or, unknown)


# ---------------------------------------------------------------------------
# Tarskian oracle
# ---------------------------------------------------------------------------

def eval_tarskian(m: ClassicalStructure, phi: Formula, a: tuple = ()) -> bool:
    """Standard semantics over the whole carrier."""
    a = tuple(a)
    if len(a) != phi.arity:
        raise ValueError("assignment length differs from formula arity")
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, Atom):
        return m.holds(phi.rel, tuple(a[k] for k in phi.args))
    if isinstance(phi, Implies):
        return (not eval_tarskian(m, phi.left, a)) or eval_tarskian(m, phi.right, a)
    if isinstance(phi, And):
        return eval_tarskian(m, phi.left, a) and eval_tarskian(m, phi.right, a)
    if isinstance(phi, Or):
        return eval_tarskian(m, phi.left, a) or eval_tarskian(m, phi.right, a)
    if isinstance(phi, Forall):
        return all(eval_tarskian(m, phi.body, a + (b,))
                   for b in m.carrier_sorted())
    if isinstance(phi, Exists):
        return any(eval_tarskian(m, phi.body, a + (b,))
                   for b in m.carrier_sorted())
    raise TypeError(phi)


# ---------------------------------------------------------------------------
# The increasing-carrier interpretation
# ---------------------------------------------------------------------------

def _check_assignment(sys: StageSystem, C: tuple, a: tuple):
    if len(a) != len(C):
        raise ValueError("assignment length differs from context length")
    for k, elem in enumerate(a):
        if elem not in sys.stage(C[k]):
            raise ValueError(f"assignment element {elem!r} outside stage {C[k]!r}")


def _union_cached(sys: StageSystem) -> ClassicalStructure:
    m = getattr(sys, "_union_struct", None)
    if m is None:
        m = union_structure(sys)
        sys._union_struct = m
    return m


def forced_value(phi: Formula) -> TruthValue:
    """Truth value forced by the propositional skeleton alone (atoms read
    as Unknown); sound at every stage and every assignment."""
    if isinstance(phi, Bottom):
        return FALSE
    if isinstance(phi, Atom):
        return unknown("atom")
    if isinstance(phi, Implies):
        return tv_implies(forced_value(phi.left), forced_value(phi.right))
    if isinstance(phi, And):
        return tv_and(forced_value(phi.left), forced_value(phi.right))
    if isinstance(phi, Or):
        return tv_or(forced_value(phi.left), forced_value(phi.right))
    if isinstance(phi, (Forall, Exists)):
        return forced_value(phi.body)
    raise TypeError(phi)


def _nat_atom(sys: StageSystem, rel: str, args: tuple) -> bool:
    fam = sys.families[rel]
    if isinstance(fam, OracleFamily):
        return bool(fam.pred(*args))
    if isinstance(fam, UnionTableFamily):
        return tuple(args) in fam.rows
    if isinstance(fam, TabledFamily):
        return any(tuple(args) in table for table in fam.tables.values())
    raise TypeError(fam)


def eval_m(sys: StageSystem, C: tuple, phi: Formula, a: tuple = (),
           budget: int | None = None) -> TruthValue:
    """Exact on finite systems; over the naturals quantifiers scan stages
    up to the budget and fall back to Unknown unless the matrix forces a
    classical value."""
    C = tuple(C)
    a = tuple(a)
    if len(C) != phi.arity:
        raise ValueError("context length differs from formula arity")
    _check_assignment(sys, C, a)
    if sys.index_set.finite:
        return tv(_eval_m_exact(sys, phi, a))
    if budget is None:
        raise ValueError("evaluation over the naturals needs a budget")
    carrier = sorted(sys.stage(budget), key=sys.element_key)

    def rec(f: Formula, args: tuple) -> TruthValue:
        if isinstance(f, Bottom):
            return FALSE
        if isinstance(f, Atom):
            return tv(_nat_atom(sys, f.rel, tuple(args[k] for k in f.args)))
        if isinstance(f, Implies):
            return tv_implies(rec(f.left, args), rec(f.right, args))
        if isinstance(f, And):
            return tv_and(rec(f.left, args), rec(f.right, args))
        if isinstance(f, Or):
            return tv_or(rec(f.left, args), rec(f.right, args))
        if isinstance(f, Exists):
            saw_unknown = False
            for b in carrier:
                v = rec(f.body, args + (b,))
                if v.is_true:
                    return TRUE
                if v.is_unknown:
                    saw_unknown = True
            if forced_value(f.body).is_false:
                return FALSE
            reason = "witness search truncated" if not saw_unknown \
                else "witness search over unknown matrix"
            return unknown(f"{reason} at budget {budget}")
        if isinstance(f, Forall):
            saw_unknown = False
            for b in carrier:
                v = rec(f.body, args + (b,))
                if v.is_false:
                    return FALSE
                if v.is_unknown:
                    saw_unknown = True
            if forced_value(f.body).is_true:
                return TRUE
            reason = "counterexample search truncated" if not saw_unknown \
                else "counterexample search over unknown matrix"
            return unknown(f"{reason} at budget {budget}")
        raise TypeError(f)

    return rec(phi, a)


def _eval_m_exact(sys: StageSystem, phi: Formula, a: tuple) -> bool:
    cache = getattr(sys, "_m_cache", None)
    if cache is None:
        cache = {}
        sys._m_cache = cache
    key = (phi, a)
    try:
        return cache[key]
    except KeyError:
        pass
    value = eval_tarskian(_union_cached(sys), phi, a)
    cache[key] = value
    return value


# ---------------------------------------------------------------------------
# Evaluation along a state declaration
# ---------------------------------------------------------------------------

def eval_ll(sys: StageSystem, d: Derivation, a: tuple = ()) -> TruthValue:
    """Recursive evaluation on the derivation; never re-searches."""
    a = tuple(a)
    _check_assignment(sys, d.context, a)
    return _eval_node(sys, d, a)


def _eval_node(sys: StageSystem, d: Derivation, a: tuple) -> TruthValue:
    if isinstance(d, DBottom):
        return FALSE
    if isinstance(d, DAtom):
        atom = d.formula
        args = tuple(a[k] for k in atom.args)
        return tv(sys.rel_value(atom.rel, d.assignment, args))
    if isinstance(d, DBinary):
        left = _eval_node(sys, d.left, a)
        right = _eval_node(sys, d.right, a)
        f = d.formula
        if isinstance(f, Implies):
            return tv_implies(left, right)
        if isinstance(f, And):
            return tv_and(left, right)
        return tv_or(left, right)
    if isinstance(d, DQuant):
        stage = sorted(sys.stage(d.index), key=sys.element_key)
        if isinstance(d.formula, Forall):
            out = TRUE
            for b in stage:
                v = _eval_node(sys, d.child, a + (b,))
                out = tv_and(out, v)
                if out.is_false:
                    return FALSE
            return out
        out = FALSE
        for b in stage:
            v = _eval_node(sys, d.child, a + (b,))
            out = tv_or(out, v)
            if out.is_true:
                return TRUE
        return out
    raise TypeError(d)


@dataclass(frozen=True)
class Divergence:
    formula: Formula
    context: tuple
    recorded_index: object
    alternative_index: object
    recorded_value: TruthValue
    alternative_value: TruthValue


def eval_ll_audit(sys: StageSystem, ll: LLRelation, d: Derivation,
                  a: tuple = (), alternatives: int = 3,
                  budget: int = 64):
    """Evaluate along the derivation and re-check every quantifier node at
    up to `alternatives` other indices above its context.  A reported
    divergence certifies that the <<-relation is inadequate for the
    formula's ambient theory."""
    a = tuple(a)
    _check_assignment(sys, d.context, a)
    divergences: list[Divergence] = []
    seen_keys: set = set()

    def quant_value(node: DQuant, child: Derivation, args: tuple) -> TruthValue:
        stage = sorted(sys.stage(child.context[-1]), key=sys.element_key)
        values = (_eval_node(sys, child, args + (b,)) for b in stage)
        if isinstance(node.formula, Forall):
            out = TRUE
            for v in values:
                out = tv_and(out, v)
            return out
        out = FALSE
        for v in values:
            out = tv_or(out, v)
        return out

    def walk(node: Derivation, args: tuple) -> TruthValue:
        if isinstance(node, (DBottom, DAtom)):
            return _eval_node(sys, node, args)
        if isinstance(node, DBinary):
            left = walk(node.left, args)
            right = walk(node.right, args)
            f = node.formula
            if isinstance(f, Implies):
                return tv_implies(left, right)
            if isinstance(f, And):
                return tv_and(left, right)
            return tv_or(left, right)
        if isinstance(node, DQuant):
            main = quant_value(node, node.child, args)
            section = ll.section(node.context)
            if not isinstance(section, UnknownBeyond):
                tried = 0
                for alt in repr_iter(section, ll.iset,
                                     limit=alternatives + 8):
                    if alt == node.index:
                        continue
                    if tried >= alternatives:
                        break
                    tried += 1
                    try:
                        alt_child = derive(sys, ll, node.context + (alt,),
                                           node.formula.body, budget=budget)
                    except SearchInconclusive:
                        continue
                    if alt_child is None:
                        continue
                    alt_value = quant_value(node, alt_child, args)
                    if alt_value != main:
                        key = (node.formula, node.context, node.index, alt)
                        if key not in seen_keys:
                            seen_keys.add(key)
                            divergences.append(Divergence(
                                node.formula, node.context, node.index, alt,
                                main, alt_value))
            # audit nested quantifiers under the recorded stage
            for b in sorted(sys.stage(node.index), key=sys.element_key):
                walk(node.child, args + (b,))
            return main
        raise TypeError(node)

    value = walk(d, a)
    return value, divergences


# ---------------------------------------------------------------------------
# Definable relations
# ---------------------------------------------------------------------------

@dataclass
class DefinableRelation:
    formula: Formula
    tables: dict  # context -> frozenset of assignments

    def contexts(self):
        return tuple(self.tables)

    def as_family(self) -> TabledFamily:
        return TabledFamily(self.formula.arity, self.tables)


def materialize(sys: StageSystem, ll: LLRelation, phi: Formula,
                nat_bound: int | None = None, budget: int = 64,
                strategy: Strategy | None = None) -> DefinableRelation:
    """Tabulate the relation defined by phi over all derivable contexts (a
    bounded grid over the naturals)."""
    iset = sys.index_set
    if iset.finite:
        grid = iset.iter_contexts(phi.arity)
    else:
        if nat_bound is None:
            raise ValueError("materialize over the naturals needs nat_bound")
        import itertools
        grid = itertools.product(range(nat_bound), repeat=phi.arity)
    tables = {}
    for C in grid:
        if not ll.is_context(C).is_true:
            continue
        try:
            d = derive(sys, ll, C, phi, budget=budget, strategy=strategy)
        except SearchInconclusive:
            continue
        if d is None:
            continue
        rows = set()
        for a in sys.stage_product(C):
            if eval_ll(sys, d, a).is_true:
                rows.add(a)
        tables[tuple(C)] = frozenset(rows)
    return DefinableRelation(formula=phi, tables=tables)
