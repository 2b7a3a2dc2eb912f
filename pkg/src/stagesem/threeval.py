"""Three-valued truth values with Kleene connectives.

Unknown only arises when a search over the unbounded index set runs out of
budget; exact evaluations on finite data stay classical.
"""

from __future__ import annotations


class TruthValue:
    """True / False / Unknown(reason).  Equality ignores the reason."""

    __slots__ = ("kind", "reason")

    def __init__(self, kind: str, reason: str | None = None):
        if kind not in ("true", "false", "unknown"):
            raise ValueError(f"bad truth kind {kind!r}")
        self.kind = kind
        self.reason = reason

    @property
    def is_true(self) -> bool:
        return self.kind == "true"

    @property
    def is_false(self) -> bool:
        return self.kind == "false"

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    @property
    def is_classical(self) -> bool:
        return self.kind != "unknown"

    def __eq__(self, other):
        return isinstance(other, TruthValue) and self.kind == other.kind

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        if self.is_unknown and self.reason:
            return f"Unknown({self.reason})"
        return self.kind.capitalize()


TRUE = TruthValue("true")
FALSE = TruthValue("false")


def unknown(reason: str) -> TruthValue:
    return TruthValue("unknown", reason)


def tv(b: bool) -> TruthValue:
    return TRUE if b else FALSE


def tv_not(a: TruthValue) -> TruthValue:
    if a.is_true:
        return FALSE
    if a.is_false:
        return TRUE
    return a


def tv_and(a: TruthValue, b: TruthValue) -> TruthValue:
    if a.is_false or b.is_false:
        return FALSE
    if a.is_true and b.is_true:
        return TRUE
    return a if a.is_unknown else b


def tv_or(a: TruthValue, b: TruthValue) -> TruthValue:
    if a.is_true or b.is_true:
        return TRUE
    if a.is_false and b.is_false:
        return FALSE
    return a if a.is_unknown else b


def tv_implies(a: TruthValue, b: TruthValue) -> TruthValue:
    return tv_or(tv_not(a), b)


def tv_all(values) -> TruthValue:
    """Kleene conjunction over an iterable (empty -> True)."""
    out = TRUE
    for v in values:
        out = tv_and(out, v)
        if out.is_false:
            return FALSE
    return out


def tv_any(values) -> TruthValue:
    """Kleene disjunction over an iterable (empty -> False)."""
    out = FALSE
    for v in values:
        out = tv_or(out, v)
        if out.is_true:
            return TRUE
    return out
