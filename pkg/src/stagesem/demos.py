"""Compiled-in demonstration systems.

* nat: initial segments of the naturals with the order relation.
* perfect: initial segments of the naturals with "the sum is a perfect
  number" as a binary relation.
* zfc: an eight-element set universe (0, 1, 2, w, Pw and three pair sets)
  over the lattice of its subsets, with membership and equality tables.

The zfc axioms avoid constant symbols: "the empty set is a member of x0"
is rendered as "every element with no members is a member of x0", and
successor talk is unfolded into membership and equality.
"""

from __future__ import annotations

from .filters import LLRelation, ll_pointwise_nat, ll_successor_nat
from .syntax import Formula, Signature, parse_formula
from .system import StageSystem, make_nat_system, make_powerset_system


def is_perfect(n: int) -> bool:
    return n > 1 and sum(d for d in range(1, n) if n % d == 0) == n


NAT_SIG = Signature({"<=": 2})
PERFECT_SIG = Signature({"R": 2})
ZFC_SIG = Signature({"in": 2, "=": 2})


def nat_system() -> StageSystem:
    return make_nat_system({"<=": (2, lambda a, b: a <= b)})


def perfect_system() -> StageSystem:
    return make_nat_system({"R": (2, lambda a, b: is_perfect(a + b))})


# ---------------------------------------------------------------------------
# The truncated set universe
# ---------------------------------------------------------------------------

ZFC_CARRIER = ("0", "1", "2", "w", "Pw", "0Pw", "w1", "wPw")

_MEMBERS = {
    "0": (),
    "1": ("0",),
    "2": ("0", "1"),
    "w": ("0", "1", "2"),
    "Pw": ("0", "1", "2", "w"),
    "0Pw": ("0", "Pw"),
    "w1": ("w", "1"),
    "wPw": ("w", "Pw"),
}

ZFC_MEMBERSHIP = frozenset(
    (a, b) for b, elems in _MEMBERS.items() for a in elems)

I0 = frozenset({"0", "w"})
I1 = frozenset({"1", "Pw"})
I2 = frozenset({"0", "w", "2", "0Pw", "w1", "wPw"})
I3 = frozenset({"0", "1", "w"})
J_UNION = I0 | I1 | I2 | I3


def zfc_system() -> StageSystem:
    return make_powerset_system(ZFC_CARRIER, ZFC_MEMBERSHIP)


_AX_EXT = (
    "forall x0 forall x1 ((x0 = x1 -> false) -> exists x2 "
    "((x2 in x0 & (x2 in x1 -> false)) | (x2 in x1 & (x2 in x0 -> false))))"
)
_AX_PAIR = (
    "forall x0 forall x1 exists x2 forall x3 "
    "((x3 in x2 -> (x3 = x0 | x3 = x1)) & ((x3 = x0 | x3 = x1) -> x3 in x2))"
)
_AX_EMPTY = "exists x0 forall x1 (x1 in x0 -> false)"
_AX_POW = (
    "forall x0 exists x1 forall x2 "
    "((x2 in x1 -> forall x3 (x3 in x2 -> x3 in x0)) & "
    "((x2 in x1 -> false) -> exists x3 (x3 in x2 & (x3 in x0 -> false))))"
)
_AX_INF = (
    "exists x0 ("
    "(forall x1 (((exists x2 x2 in x1) -> false) -> x1 in x0)) & "
    "(forall x1 (x1 in x0 -> exists x2 (x2 in x0 & "
    "forall x3 ((x3 in x2 -> (x3 = x1 | x3 in x1)) & "
    "((x3 = x1 | x3 in x1) -> x3 in x2)))))"
    ")"
)

ZFC_AXIOM_TEXT = {
    "ext": _AX_EXT,
    "pair": _AX_PAIR,
    "empty": _AX_EMPTY,
    "pow": _AX_POW,
    "inf": _AX_INF,
}


def zfc_axioms() -> list[Formula]:
    return [parse_formula(text, ZFC_SIG) for text in ZFC_AXIOM_TEXT.values()]


# ---------------------------------------------------------------------------
# Registry used by the service and the CLI
# ---------------------------------------------------------------------------

DEMOS = {
    "nat": (nat_system, NAT_SIG),
    "perfect": (perfect_system, PERFECT_SIG),
    "zfc": (zfc_system, ZFC_SIG),
}

ZFC_INDEX_ALIASES = {
    "i0": I0, "i1": I1, "i2": I2, "i3": I3, "j": J_UNION,
}


def demo_ll(name: str) -> LLRelation:
    if name == "pointwise":
        return ll_pointwise_nat()
    if name == "succ":
        return ll_successor_nat()
    raise ValueError(f"unknown <<-relation {name!r} (try pointwise, succ)")
