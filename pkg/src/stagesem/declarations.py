"""State declarations: certificates that a formula can be interpreted at a
context, fixing the stage used at each quantifier and the relation instance
used at each atom.

A derivation mirrors the formula tree.  Variable rule: x_k may be read at
any stage j >= C[k].  Atom rule: the chosen stages must form a signature
assignment of the symbol.  Quantifier rule: the chosen index i must satisfy
C << i, and the child is derived at C + (i,).
"""

from __future__ import annotations

from dataclasses import dataclass

from .filters import (LLRelation, UnknownBeyond, UnsupportedRepresentation,
                      repr_iter, repr_min)
from .syntax import (And, Atom, Bottom, Exists, Forall, Formula, Implies, Or,
                     pretty)
from .system import ALL_CONTEXTS, StageSystem
from .threeval import FALSE, TRUE, TruthValue, unknown


class DerivationError(ValueError):
    pass


class SearchInconclusive(Exception):
    """The search ran out of budget over an unbounded index set."""


@dataclass(frozen=True)
class Derivation:
    formula: Formula
    context: tuple


@dataclass(frozen=True)
class DBottom(Derivation):
    pass


@dataclass(frozen=True)
class DAtom(Derivation):
    assignment: tuple = ()


@dataclass(frozen=True)
class DBinary(Derivation):
    left: "Derivation" = None  # type: ignore[assignment]
    right: "Derivation" = None  # type: ignore[assignment]


@dataclass(frozen=True)
class DQuant(Derivation):
    index: object = None
    child: "Derivation" = None  # type: ignore[assignment]


class Strategy:
    """How quantifier indices are chosen during search."""

    @staticmethod
    def minimal() -> "Strategy":
        return Strategy()

    @staticmethod
    def given(chain) -> "GivenStrategy":
        return GivenStrategy(tuple(chain))

    def candidates(self, section_repr, iset, depth, limit):
        return repr_iter(section_repr, iset, limit)


class GivenStrategy(Strategy):
    """Pins the quantifier index per binder depth (the context length at
    the quantifier)."""

    def __init__(self, chain: tuple):
        self.chain = chain

    def candidates(self, section_repr, iset, depth, limit):
        if depth >= len(self.chain):
            return
        pinned = self.chain[depth]
        from .filters import repr_contains
        if repr_contains(section_repr, pinned, iset).is_true:
            yield pinned


def derive(sys: StageSystem, ll: LLRelation, C: tuple, phi: Formula,
           strategy: Strategy | None = None, budget: int = 64):
    """Search for a state declaration of phi at context C.  Returns a
    Derivation, or None when no declaration exists.  Raises
    SearchInconclusive when an unbounded candidate search hits the budget.
    """
    C = tuple(C)
    if len(C) != phi.arity:
        raise DerivationError(
            f"context length {len(C)} != arity {phi.arity} of {pretty(phi)}")
    ctx_state = ll.is_context(C)
    if ctx_state.is_false:
        raise DerivationError(f"{C!r} is not a <<-context")
    if ctx_state.is_unknown:
        raise SearchInconclusive(f"cannot confirm {C!r} is a <<-context")
    if strategy is None:
        strategy = Strategy.minimal()
    return _derive(sys, ll, C, phi, strategy, budget)


def _derive(sys, ll, C, phi, strategy, budget):
    if isinstance(phi, Bottom):
        return DBottom(phi, C)
    if isinstance(phi, Atom):
        assignment = _atom_assignment(sys, C, phi)
        if assignment is None:
            return None
        return DAtom(phi, C, assignment)
    if isinstance(phi, (Implies, And, Or)):
        left = _derive(sys, ll, C, phi.left, strategy, budget)
        if left is None:
            return None
        right = _derive(sys, ll, C, phi.right, strategy, budget)
        if right is None:
            return None
        return DBinary(phi, C, left, right)
    if isinstance(phi, (Forall, Exists)):
        section = ll.section(C)
        if isinstance(section, UnknownBeyond):
            raise SearchInconclusive(
                f"<<-section at {C!r} unknown within budget")
        truncated = not ll.iset.finite
        try:
            candidates = strategy.candidates(section, ll.iset, len(C), budget)
        except UnsupportedRepresentation as exc:
            raise SearchInconclusive(str(exc))
        count = 0
        for i in candidates:
            count += 1
            child = _derive(sys, ll, C + (i,), phi.body, strategy, budget)
            if child is not None:
                return DQuant(phi, C, i, child)
        if truncated and count >= budget:
            raise SearchInconclusive(
                f"quantifier search at {C!r} exhausted budget {budget}")
        return None
    raise TypeError(phi)


def _atom_assignment(sys, C, phi: Atom):
    """Pointwise-minimal signature assignment covering the variable stages."""
    needed = tuple(C[k] for k in phi.args)
    assigned = sys.assignments[phi.rel]
    if assigned == ALL_CONTEXTS:
        return needed
    iset = sys.index_set
    fitting = [A for A in assigned
               if all(iset.leq(needed[p], A[p]) for p in range(len(needed)))]
    if not fitting:
        return None
    return min(fitting, key=lambda A: tuple(iset.sort_key(j) for j in A))


def validate_derivation(sys: StageSystem, ll: LLRelation, d: Derivation) -> list:
    """Mechanically replay the declaration rules; returns rule violations.
    Independent of the search in `derive`."""
    problems: list[str] = []
    iset = sys.index_set

    if ll.is_context(d.context).is_false:
        problems.append(f"root context {d.context!r} is not a <<-context")

    def walk(node: Derivation):
        C = node.context
        phi = node.formula
        if len(C) != phi.arity:
            problems.append(f"context length mismatch at {pretty(phi)}")
            return
        if isinstance(node, DBottom):
            return
        if isinstance(node, DAtom):
            atom = node.formula
            if len(node.assignment) != len(atom.args):
                problems.append(f"assignment arity mismatch at {pretty(atom)}")
                return
            for p, k in enumerate(atom.args):
                if not iset.leq(C[k], node.assignment[p]):
                    problems.append(
                        f"variable x{k} read below its stage at {pretty(atom)}")
            if not sys.assignment_holds(atom.rel, node.assignment):
                problems.append(
                    f"{atom.rel!r} has no assignment at {node.assignment!r}")
            return
        if isinstance(node, DBinary):
            for child in (node.left, node.right):
                if child.context != C:
                    problems.append("connective child changed the context")
                walk(child)
            return
        if isinstance(node, DQuant):
            if ll.holds(C, node.index).is_false:
                problems.append(
                    f"quantifier index {node.index!r} not << above {C!r}")
            if node.child.context != C + (node.index,):
                problems.append("quantifier child context mismatch")
            walk(node.child)
            return
        problems.append(f"unknown node {node!r}")

    walk(d)
    return problems


def involved_indices(d: Derivation) -> frozenset:
    """The finite set of stages a derivation mentions: contexts at the
    leaves plus every stage an atom reads its variables at."""
    if isinstance(d, DBottom):
        return frozenset(d.context)
    if isinstance(d, DAtom):
        return frozenset(d.context) | frozenset(d.assignment)
    if isinstance(d, DBinary):
        return involved_indices(d.left) | involved_indices(d.right)
    if isinstance(d, DQuant):
        return involved_indices(d.child)
    raise TypeError(d)


def quantifier_chain(d: Derivation) -> dict:
    """Map binder depth -> chosen index along the leftmost quantifier spine
    (reported per context length, reflecting per-level pinning)."""
    chain: dict[int, object] = {}

    def walk(node):
        if isinstance(node, DQuant):
            chain.setdefault(len(node.context), node.index)
            walk(node.child)
        elif isinstance(node, DBinary):
            walk(node.left)
            walk(node.right)

    walk(d)
    return chain


def derivation_trace(d: Derivation, sys: StageSystem) -> list:
    """Human-readable one-line-per-rule trace."""
    fmt = sys.index_set.format_index
    lines = []

    def ctx(C):
        return "(" + ",".join(fmt(i) for i in C) + ")"

    def walk(node, depth):
        pad = "  " * depth
        C = ctx(node.context)
        if isinstance(node, DBottom):
            lines.append(f"{pad}{C} : false")
        elif isinstance(node, DAtom):
            lines.append(
                f"{pad}{C} : {pretty(node.formula)} via assignment "
                f"{ctx(node.assignment)}")
        elif isinstance(node, DBinary):
            lines.append(f"{pad}{C} : {pretty(node.formula)}")
            walk(node.left, depth + 1)
            walk(node.right, depth + 1)
        elif isinstance(node, DQuant):
            lines.append(
                f"{pad}{C} : {pretty(node.formula)} choosing index "
                f"{fmt(node.index)}")
            walk(node.child, depth + 1)

    walk(d, 0)
    return lines


def is_approximable(sys: StageSystem, ll: LLRelation, phi: Formula,
                    budget: int = 16) -> TruthValue:
    """Does some <<-context carry a declaration of phi?  Unknown when the
    context search over an unbounded index set exhausts the budget."""
    n = phi.arity
    iset = sys.index_set
    if iset.finite:
        for C in iset.iter_contexts(n):
            if ll.is_context(C).is_true:
                try:
                    if derive(sys, ll, C, phi, budget=budget) is not None:
                        return TRUE
                except SearchInconclusive:
                    pass
        return FALSE
    import itertools as _it
    from .filters import PerLevelFamily
    if isinstance(ll.family, PerLevelFamily):
        # finitely many <<-contexts: approximability is decidable
        level = ll.family.levels.get(n)
        candidates = sorted(level.tuples) if level is not None else []
        for C in candidates:
            try:
                if derive(sys, ll, C, phi, budget=budget) is not None:
                    return TRUE
            except SearchInconclusive:
                return unknown("declaration search truncated")
        return FALSE
    for C in _it.product(range(budget), repeat=n):
        state = ll.is_context(C)
        if not state.is_true:
            continue
        try:
            if derive(sys, ll, C, phi, budget=budget) is not None:
                return TRUE
        except SearchInconclusive:
            pass
    return unknown(f"no declaration found within budget {budget}")


def select_contexts_iota(sys: StageSystem, ll: LLRelation, n: int) -> tuple:
    """Build a context by repeatedly taking the least index of the current
    <<-section."""
    C: tuple = ()
    for _ in range(n):
        i, status = repr_min(ll.section(C), sys.index_set)
        if status == "none":
            raise DerivationError(f"empty <<-section at {C!r}")
        if status == "unknown":
            raise SearchInconclusive(f"<<-section at {C!r} unknown")
        C = C + (i,)
    return C
