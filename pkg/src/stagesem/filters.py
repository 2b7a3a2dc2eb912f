"""The "indefinitely many" filter calculus.

D_0 holds only of {()}; a set of indices is in D_1 when it contains an
up-set; a set of (n+1)-contexts is in D_(n+1) when the contexts whose
section is in D_1 form a set in D_n.  Families of context sets are
represented per level, with generated families (one base level, projected
down and freely extended up) as the workhorse.

Answers are three-valued: over the naturals a budget-truncated search can
return Unknown, and Unknown is never coerced to a classical answer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .system import (ALL_CONTEXTS, FinitePowersetLattice, IndexSet, Naturals,
                     StageSystem)
from .threeval import FALSE, TRUE, TruthValue, tv, tv_all, unknown


class UnsupportedRepresentation(ValueError):
    pass


class ShorteningViolation(ValueError):
    """A positive membership whose prefix fails the shortening law."""


_ENUM_LIMIT = 200_000


# ---------------------------------------------------------------------------
# Index set representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexSetRepr:
    pass


@dataclass(frozen=True)
class AllIndices(IndexSetRepr):
    pass


@dataclass(frozen=True)
class EmptyIndices(IndexSetRepr):
    pass


@dataclass(frozen=True)
class UpFrom(IndexSetRepr):
    h: object = None


@dataclass(frozen=True)
class ExplicitIndices(IndexSetRepr):
    members: frozenset = frozenset()


@dataclass(frozen=True)
class UnknownBeyond(IndexSetRepr):
    budget: object = None
    known: IndexSetRepr = field(default_factory=EmptyIndices)


def repr_contains(r: IndexSetRepr, i, iset: IndexSet) -> TruthValue:
    if isinstance(r, AllIndices):
        return TRUE
    if isinstance(r, EmptyIndices):
        return FALSE
    if isinstance(r, UpFrom):
        return tv(iset.leq(r.h, i))
    if isinstance(r, ExplicitIndices):
        return tv(i in r.members)
    if isinstance(r, UnknownBeyond):
        if repr_contains(r.known, i, iset).is_true:
            return TRUE
        return unknown(f"membership undecided within budget {r.budget}")
    raise TypeError(r)


def in_D1(r: IndexSetRepr, iset: IndexSet) -> TruthValue:
    """Does the set contain an up-set?"""
    if isinstance(r, AllIndices):
        return TRUE
    if isinstance(r, EmptyIndices):
        return FALSE
    if isinstance(r, UpFrom):
        return TRUE
    if isinstance(r, ExplicitIndices):
        if not iset.finite:
            # a finite set of naturals contains no up-set
            return FALSE
        return tv(any(iset.up_set(i) <= r.members for i in r.members))
    if isinstance(r, UnknownBeyond):
        if in_D1(r.known, iset).is_true:
            return TRUE
        return unknown(f"up-set search truncated at budget {r.budget}")
    raise TypeError(r)


def repr_intersect(a: IndexSetRepr, b: IndexSetRepr, iset: IndexSet) -> IndexSetRepr:
    if isinstance(a, EmptyIndices) or isinstance(b, EmptyIndices):
        return EmptyIndices()
    if isinstance(a, AllIndices):
        return b
    if isinstance(b, AllIndices):
        return a
    if isinstance(a, UnknownBeyond) or isinstance(b, UnknownBeyond):
        budgets = [r.budget for r in (a, b) if isinstance(r, UnknownBeyond)]
        return UnknownBeyond(budget=budgets[0])
    if isinstance(a, UpFrom) and isinstance(b, UpFrom):
        if isinstance(iset, Naturals):
            return UpFrom(max(a.h, b.h))
        if isinstance(iset, FinitePowersetLattice):
            return UpFrom(a.h | b.h)
        return ExplicitIndices(iset.up_set(a.h) & iset.up_set(b.h))
    if isinstance(a, UpFrom):
        a, b = b, a
    # now a is Explicit
    if isinstance(b, UpFrom):
        if iset.finite:
            return ExplicitIndices(a.members & iset.up_set(b.h))
        return ExplicitIndices(frozenset(i for i in a.members if iset.leq(b.h, i)))
    return ExplicitIndices(a.members & b.members)


def repr_min(r: IndexSetRepr, iset: IndexSet):
    """(index, status): status is "exact", "none" or "unknown"."""
    if isinstance(r, AllIndices):
        if iset.finite:
            return next(iter(iset.iter_all())), "exact"
        return 0, "exact"
    if isinstance(r, EmptyIndices):
        return None, "none"
    if isinstance(r, UpFrom):
        return r.h, "exact"
    if isinstance(r, ExplicitIndices):
        if not r.members:
            return None, "none"
        return min(r.members, key=iset.sort_key), "exact"
    if isinstance(r, UnknownBeyond):
        return None, "unknown"
    raise TypeError(r)


def repr_iter(r: IndexSetRepr, iset: IndexSet, limit: int | None = None):
    """Candidate indices in canonical ascending order.  Raises on Unknown."""
    if isinstance(r, UnknownBeyond):
        raise UnsupportedRepresentation("cannot enumerate an unknown region")
    if isinstance(r, EmptyIndices):
        return
    if isinstance(r, ExplicitIndices):
        members = sorted(r.members, key=iset.sort_key)
        yield from (members[:limit] if limit else members)
        return
    if iset.finite:
        if isinstance(r, AllIndices):
            pool = list(iset.iter_all())
        else:  # UpFrom
            pool = sorted(iset.up_set(r.h), key=iset.sort_key)
        yield from (pool[:limit] if limit else pool)
        return
    start = 0 if isinstance(r, AllIndices) else r.h
    count = 0
    i = start
    while limit is None or count < limit:
        yield i
        i += 1
        count += 1


# ---------------------------------------------------------------------------
# Per-level sets
# ---------------------------------------------------------------------------

class LevelSet:
    """A set of length-n contexts."""

    n: int

    def member(self, C: tuple) -> TruthValue:
        raise NotImplementedError

    def section(self, prefix: tuple) -> IndexSetRepr:
        raise NotImplementedError

    def nonempty(self, iset: IndexSet) -> TruthValue:
        raise NotImplementedError


class ExplicitTuples(LevelSet):
    def __init__(self, n: int, tuples):
        self.n = n
        self.tuples = frozenset(map(tuple, tuples))
        for t in self.tuples:
            if len(t) != n:
                raise ValueError(f"tuple {t!r} has length != {n}")

    def member(self, C):
        return tv(tuple(C) in self.tuples)

    def section(self, prefix):
        prefix = tuple(prefix)
        return ExplicitIndices(frozenset(
            t[-1] for t in self.tuples if t[:-1] == prefix))

    def nonempty(self, iset):
        return tv(bool(self.tuples))


class AllLevel(LevelSet):
    def __init__(self, n: int):
        self.n = n

    def member(self, C):
        return TRUE

    def section(self, prefix):
        return AllIndices()

    def nonempty(self, iset):
        return TRUE


class SectionMap(LevelSet):
    """A level-n set (n >= 1) represented by prefix -> section map.

    `sections_nonempty` is a hint: TRUE means every prefix has a non-empty
    section, which licenses O(1) downward projections.
    """

    def __init__(self, n: int, fn, iset: IndexSet,
                 sections_nonempty: TruthValue | None = None):
        if n < 1:
            raise ValueError("SectionMap needs level >= 1")
        self.n = n
        self._fn = fn
        self.iset = iset
        self._cache: dict = {}
        self.sections_nonempty = sections_nonempty

    def section(self, prefix):
        prefix = tuple(prefix)
        try:
            return self._cache[prefix]
        except KeyError:
            v = self._fn(prefix)
            self._cache[prefix] = v
            return v

    def member(self, C):
        C = tuple(C)
        return repr_contains(self.section(C[:-1]), C[-1], self.iset)

    def nonempty(self, iset):
        if self.sections_nonempty is not None and self.sections_nonempty.is_true:
            return TRUE
        if not iset.finite:
            return unknown("cannot scan sections of an unbounded index set")
        found_unknown = False
        for prefix in iset.iter_contexts(self.n - 1):
            r = self.section(prefix)
            if isinstance(r, UnknownBeyond):
                found_unknown = True
            elif repr_min(r, iset)[1] == "exact":
                return TRUE
        return unknown("sections unknown") if found_unknown else FALSE


# ---------------------------------------------------------------------------
# Context families (all levels at once)
# ---------------------------------------------------------------------------

class ContextFamily:
    def membership(self, C: tuple) -> TruthValue:
        raise NotImplementedError

    def section(self, C: tuple) -> IndexSetRepr:
        """{i : C + (i,) in the family}."""
        raise NotImplementedError

    def symbolic_in_dn(self, n: int) -> TruthValue:
        raise UnsupportedRepresentation(
            f"no symbolic D_n evaluation for {type(self).__name__}")


class AllFamily(ContextFamily):
    """The trivial family: every context at every level."""

    def membership(self, C):
        return TRUE

    def section(self, C):
        return AllIndices()

    def symbolic_in_dn(self, n):
        return TRUE


class GeneratedFamily(ContextFamily):
    """Family generated from one base level: lower levels by existential
    projection, higher levels by free extension."""

    def __init__(self, base: LevelSet, iset: IndexSet):
        self.base = base
        self.iset = iset

    @property
    def base_level(self) -> int:
        return self.base.n

    def membership(self, C):
        C = tuple(C)
        m, b = len(C), self.base.n
        if m == b:
            return self._base_member(C)
        if m > b:
            return self._base_member(C[:b])
        if m == 0:
            return self.base.nonempty(self.iset)
        return self._projected_member(C)

    def _base_member(self, C):
        if isinstance(self.base, SectionMap):
            r = self.base.section(C[:-1])
            return repr_contains(r, C[-1], self.iset)
        return self.base.member(C)

    def _projected_member(self, C):
        m, b = len(C), self.base.n
        hint = getattr(self.base, "sections_nonempty", None)
        if hint is not None:
            if hint.is_true:
                return TRUE
            if hint.is_unknown:
                return unknown("projection over unknown sections")
        if not self.iset.finite:
            raise UnsupportedRepresentation(
                "projection over an unbounded index set without the "
                "non-empty-sections guarantee")
        if b - 1 > m:
            span = len(list(self.iset.iter_all())) ** (b - 1 - m)
            if span > _ENUM_LIMIT:
                raise UnsupportedRepresentation("projection grid too large")
        found_unknown = False
        for ext in self.iset.iter_contexts(b - 1 - m):
            r = self._section_of_base(C + ext)
            if isinstance(r, UnknownBeyond):
                found_unknown = True
                continue
            if repr_min(r, self.iset)[1] == "exact":
                return TRUE
        return unknown("projection truncated") if found_unknown else FALSE

    def _section_of_base(self, prefix):
        if isinstance(self.base, SectionMap):
            return self.base.section(prefix)
        return self.base.section(prefix)

    def section(self, C):
        C = tuple(C)
        m, b = len(C), self.base.n
        if m + 1 == b:
            return self._section_of_base(C)
        if m + 1 > b:
            v = self._base_member(C[:b])
            if v.is_true:
                return AllIndices()
            if v.is_false:
                return EmptyIndices()
            return UnknownBeyond(budget=None)
        # m + 1 < b: section of a projected level
        hint = getattr(self.base, "sections_nonempty", None)
        if hint is not None and hint.is_true:
            return AllIndices()
        if not self.iset.finite:
            raise UnsupportedRepresentation(
                "projected section over an unbounded index set")
        members = set()
        found_unknown = False
        for i in self.iset.iter_all():
            v = self._projected_member(C + (i,))
            if v.is_true:
                members.add(i)
            elif v.is_unknown:
                found_unknown = True
        if found_unknown:
            return UnknownBeyond(budget=None,
                                 known=ExplicitIndices(frozenset(members)))
        return ExplicitIndices(frozenset(members))

    def symbolic_in_dn(self, n):
        # Definition-style evaluation over the naturals: descending the
        # d-chain turns generated levels above the base into the generated
        # level one lower, so everything reduces to the base sections.
        hint = getattr(self.base, "sections_nonempty", None)
        if hint is None:
            if isinstance(self.base, ExplicitTuples):
                # finitely many tuples over an unbounded index set: sections
                # are finite, so they contain no up-set
                if n == 0:
                    return self.base.nonempty(self.iset)
                return FALSE
            raise UnsupportedRepresentation(
                "symbolic D_n needs a section-mapped base")
        if hint.is_true:
            return TRUE
        if hint.is_unknown:
            return unknown("sections unknown within budget")
        return FALSE


class PerLevelFamily(ContextFamily):
    """Explicit per-level sets (levels not present are empty)."""

    def __init__(self, levels: dict, iset: IndexSet):
        self.levels = dict(levels)
        self.iset = iset

    def membership(self, C):
        C = tuple(C)
        level = self.levels.get(len(C))
        if level is None:
            return FALSE
        return level.member(C)

    def section(self, C):
        C = tuple(C)
        level = self.levels.get(len(C) + 1)
        if level is None:
            return EmptyIndices()
        return level.section(C)

    def symbolic_in_dn(self, n):
        level = self.levels.get(n)
        if level is None:
            return FALSE
        if isinstance(level, ExplicitTuples):
            if n == 0:
                return level.nonempty(self.iset)
            return FALSE  # finite level over an unbounded index set
        raise UnsupportedRepresentation("symbolic D_n on this level shape")


class HorizonFamily(ContextFamily):
    """Sections are up-sets given by a horizon function on consistent
    prefixes; a context belongs when every component clears the horizon of
    its prefix.  The shortening law holds by construction."""

    def __init__(self, horizon_fn, iset: IndexSet):
        self.horizon_fn = horizon_fn
        self.iset = iset

    def membership(self, C):
        C = tuple(C)
        for k in range(len(C)):
            if not self.iset.leq(self.horizon_fn(C[:k]), C[k]):
                return FALSE
        return TRUE

    def section(self, C):
        C = tuple(C)
        if not self.membership(C).is_true:
            return EmptyIndices()
        return UpFrom(self.horizon_fn(C))

    def symbolic_in_dn(self, n):
        return TRUE


class IntersectionFamily(ContextFamily):
    def __init__(self, children, iset: IndexSet):
        flat = []
        for c in children:
            if isinstance(c, IntersectionFamily):
                flat.extend(c.children)
            elif not isinstance(c, AllFamily):
                flat.append(c)
        self.children = tuple(flat)
        self.iset = iset

    def membership(self, C):
        return tv_all(child.membership(C) for child in self.children)

    def section(self, C):
        out: IndexSetRepr = AllIndices()
        for child in self.children:
            out = repr_intersect(out, child.section(C), self.iset)
            if isinstance(out, EmptyIndices):
                return out
        return out

    def symbolic_in_dn(self, n):
        return tv_all(child.symbolic_in_dn(n) for child in self.children)


class RestrictedFamily(ContextFamily):
    def __init__(self, base: ContextFamily, allowed: frozenset, iset: IndexSet):
        self.base = base
        self.allowed = frozenset(allowed)
        self.iset = iset

    def membership(self, C):
        if any(i not in self.allowed for i in C):
            return FALSE
        return self.base.membership(C)

    def section(self, C):
        if any(i not in self.allowed for i in C):
            return EmptyIndices()
        return repr_intersect(self.base.section(C),
                              ExplicitIndices(self.allowed), self.iset)


# ---------------------------------------------------------------------------
# D_n on families
# ---------------------------------------------------------------------------

def _explicit_in_dn(tuples: frozenset, n: int, iset: IndexSet) -> TruthValue:
    if n == 0:
        return tv(tuples == {()})
    if n == 1:
        return in_D1(ExplicitIndices(frozenset(t[0] for t in tuples)), iset)
    d = set()
    for C in iset.iter_contexts(n - 1):
        sec = frozenset(t[-1] for t in tuples if t[:-1] == C)
        if in_D1(ExplicitIndices(sec), iset).is_true:
            d.add(C)
    return _explicit_in_dn(frozenset(d), n - 1, iset)


def in_Dn(fam: ContextFamily, n: int, iset: IndexSet) -> TruthValue:
    """Is level n of the family an indefinitely large set of n-contexts?"""
    if not iset.finite:
        return fam.symbolic_in_dn(n)
    size = len(list(iset.iter_all())) ** n
    if size > _ENUM_LIMIT:
        raise UnsupportedRepresentation(f"level grid of size {size} too large")
    tuples = set()
    for C in iset.iter_contexts(n):
        v = fam.membership(C)
        if v.is_unknown:
            return unknown("level membership unknown")
        if v.is_true:
            tuples.add(C)
    return _explicit_in_dn(frozenset(tuples), n, iset)


def level_in_Dn(level: LevelSet, iset: IndexSet) -> TruthValue:
    """D_n membership of a single explicit level (finite index sets)."""
    if isinstance(level, AllLevel):
        return TRUE
    if isinstance(level, ExplicitTuples):
        if not iset.finite:
            if level.n == 0:
                return level.nonempty(iset)
            return FALSE
        return _explicit_in_dn(level.tuples, level.n, iset)
    raise UnsupportedRepresentation("level shape not supported")


def generate_family(level: LevelSet, iset: IndexSet) -> GeneratedFamily:
    return GeneratedFamily(level, iset)


def intersect(f: ContextFamily, g: ContextFamily, iset: IndexSet) -> ContextFamily:
    if isinstance(f, AllFamily):
        return g
    if isinstance(g, AllFamily):
        return f
    return IntersectionFamily([f, g], iset)


def is_indefinitely_large_signature(sys: StageSystem) -> TruthValue:
    out = TRUE
    for name, arity in sys.signature.items():
        assigned = sys.assignments[name]
        if assigned == ALL_CONTEXTS:
            continue
        level = ExplicitTuples(arity, assigned)
        out = tv_all([out, level_in_Dn(level, sys.index_set)])
        if out.is_false:
            return FALSE
    return out


# ---------------------------------------------------------------------------
# <<-relations
# ---------------------------------------------------------------------------

class LLRelation:
    """A family satisfying the shortening law: membership of C+(i,) at level
    n+1 implies membership of C at level n.  The law is enforced on every
    positive answer and may be checked exhaustively on finite index sets."""

    def __init__(self, family: ContextFamily, iset: IndexSet,
                 provenance: str = "user"):
        self.family = family
        self.iset = iset
        self.provenance = provenance
        self._verified: set = set()

    def holds(self, C: tuple, i) -> TruthValue:
        C = tuple(C)
        v = self.family.membership(C + (i,))
        if v.is_true:
            self._enforce_prefixes(C + (i,))
        return v

    def is_context(self, C: tuple) -> TruthValue:
        C = tuple(C)
        v = self.family.membership(C)
        if v.is_true and C:
            self._enforce_prefixes(C)
        return v

    def section(self, C: tuple) -> IndexSetRepr:
        return self.family.section(tuple(C))

    def _enforce_prefixes(self, C: tuple):
        if C in self._verified:
            return
        for m in range(len(C) - 1, -1, -1):
            prefix = C[:m]
            if prefix in self._verified:
                break
            if self.family.membership(prefix).is_false:
                raise ShorteningViolation(
                    f"{C!r} is a member but its prefix {prefix!r} is not")
        self._verified.add(C)

    def restricted(self, allowed, sub_iset: IndexSet) -> "LLRelation":
        fam = RestrictedFamily(self.family, frozenset(allowed), sub_iset)
        return LLRelation(fam, sub_iset, provenance=f"{self.provenance}|restricted")


def ll_from_rows(rows, iset: IndexSet, provenance: str = "user table") -> LLRelation:
    """Build the smallest shortening-law-closed relation containing the
    given (context, index) rows."""
    tuples: set = set()
    for C, i in rows:
        full = tuple(C) + (i,)
        for m in range(len(full) + 1):
            tuples.add(full[:m])
    levels: dict[int, LevelSet] = {}
    for n in sorted({len(t) for t in tuples}):
        levels[n] = ExplicitTuples(n, {t for t in tuples if len(t) == n})
    return LLRelation(PerLevelFamily(levels, iset), iset, provenance)


def ll_all(iset: IndexSet) -> LLRelation:
    """The trivial relation: every context at every level."""
    return LLRelation(AllFamily(), iset, provenance="trivial")


def ll_horizon(horizon_fn, iset: IndexSet, provenance: str = "horizon") -> LLRelation:
    return LLRelation(HorizonFamily(horizon_fn, iset), iset, provenance)


def ll_pointwise_nat() -> LLRelation:
    """Stage must reach every index mentioned so far: the horizon of a
    prefix is its maximum (0 for the empty prefix)."""
    return ll_horizon(lambda C: max(C) if C else 0, Naturals(),
                      provenance="pointwise")


def ll_successor_nat() -> LLRelation:
    """Horizon strictly above everything mentioned so far."""
    return ll_horizon(lambda C: max(C) + 1 if C else 1, Naturals(),
                      provenance="succ")


def check_shortening(ll: LLRelation, max_level: int) -> list:
    """Exhaustive shortening-law check on a finite index set; returns the
    violating contexts."""
    iset = ll.iset
    violations = []
    for n in range(1, max_level + 1):
        for C in iset.iter_contexts(n):
            if ll.family.membership(C).is_true:
                if ll.family.membership(C[:-1]).is_false:
                    violations.append(C)
    return violations
