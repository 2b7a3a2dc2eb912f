"""Relational first-order syntax.

Formulas are level-normalized: the free variables of an n-ary formula are
x0..x(n-1), and a quantifier on an n-ary formula binds exactly level n (its
body is (n+1)-ary).  The surface grammar uses named variables; parsing
alpha-renames them onto levels.  Negation is sugar: not(phi) = phi -> false.

Everything here is immutable and safe to share between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


class NormalizationError(ParseError):
    pass


class Signature:
    """Relation symbols with arities.  Names are unique."""

    def __init__(self, relations: dict[str, int] | None = None):
        self._arities: dict[str, int] = {}
        for name, arity in (relations or {}).items():
            self.add(name, arity)

    def add(self, name: str, arity: int):
        if name in self._arities:
            raise ValueError(f"duplicate relation symbol {name!r}")
        if arity < 0:
            raise ValueError(f"negative arity for {name!r}")
        self._arities[name] = arity

    def arity(self, name: str) -> int:
        return self._arities[name]

    def __contains__(self, name: str) -> bool:
        return name in self._arities

    def names(self) -> tuple[str, ...]:
        return tuple(self._arities)

    def items(self):
        return self._arities.items()

    def __repr__(self):
        inner = ", ".join(f"{n}:{a}" for n, a in self._arities.items())
        return f"Signature({{{inner}}})"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Formula:
    arity: int

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("negative formula arity")


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    rel: str = ""
    args: tuple[int, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        for lvl in self.args:
            if not (0 <= lvl < self.arity):
                raise ValueError(
                    f"atom {self.rel} uses level {lvl} outside arity {self.arity}")


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula = None  # type: ignore[assignment]
    right: Formula = None  # type: ignore[assignment]

    def __post_init__(self):
        super().__post_init__()
        if self.left.arity != self.arity or self.right.arity != self.arity:
            raise ValueError("connective children must share the formula arity")


@dataclass(frozen=True)
class Implies(_Binary):
    pass


@dataclass(frozen=True)
class And(_Binary):
    pass


@dataclass(frozen=True)
class Or(_Binary):
    pass


@dataclass(frozen=True)
class _Quant(Formula):
    body: Formula = None  # type: ignore[assignment]

    def __post_init__(self):
        super().__post_init__()
        if self.body.arity != self.arity + 1:
            raise ValueError("quantifier body must have arity+1 free variables")


@dataclass(frozen=True)
class Forall(_Quant):
    pass


@dataclass(frozen=True)
class Exists(_Quant):
    pass


def neg(phi: Formula) -> Formula:
    return Implies(phi.arity, phi, Bottom(phi.arity))


def is_neg(phi: Formula) -> bool:
    return isinstance(phi, Implies) and isinstance(phi.right, Bottom)


class FormulaSet:
    """Ordered formula collection, deduplicated by structural equality."""

    def __init__(self, formulas=()):
        self._items: list[Formula] = []
        self._seen: set[Formula] = set()
        for phi in formulas:
            self.add(phi)

    def add(self, phi: Formula):
        if phi not in self._seen:
            self._seen.add(phi)
            self._items.append(phi)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __contains__(self, phi: Formula):
        return phi in self._seen

    def __eq__(self, other):
        if isinstance(other, FormulaSet):
            return self._seen == other._seen
        return NotImplemented

    def __repr__(self):
        return f"FormulaSet({self._items!r})"


def subformulas(phi: Formula) -> FormulaSet:
    """Reflexive-transitive subformula set, in preorder."""
    out = FormulaSet()

    def walk(f: Formula):
        out.add(f)
        if isinstance(f, _Binary):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, _Quant):
            walk(f.body)

    walk(phi)
    return out


# ---------------------------------------------------------------------------
# Hat closure: rewrite universals to not-exists-not, close under subformulas
# ---------------------------------------------------------------------------

MODE_FULL = "full"
MODE_NEGATIVE_ONLY = "negative_only"


def _rewrite_full(phi: Formula) -> Formula:
    if isinstance(phi, (Bottom, Atom)):
        return phi
    if isinstance(phi, Implies):
        return Implies(phi.arity, _rewrite_full(phi.left), _rewrite_full(phi.right))
    if isinstance(phi, And):
        return And(phi.arity, _rewrite_full(phi.left), _rewrite_full(phi.right))
    if isinstance(phi, Or):
        return Or(phi.arity, _rewrite_full(phi.left), _rewrite_full(phi.right))
    if isinstance(phi, Exists):
        return Exists(phi.arity, _rewrite_full(phi.body))
    if isinstance(phi, Forall):
        body = _rewrite_full(phi.body)
        return neg(Exists(phi.arity, neg(body)))
    raise TypeError(phi)


def _rewrite_negative(phi: Formula, positive: bool) -> Formula:
    if isinstance(phi, (Bottom, Atom)):
        return phi
    if isinstance(phi, Implies):
        return Implies(phi.arity,
                       _rewrite_negative(phi.left, not positive),
                       _rewrite_negative(phi.right, positive))
    if isinstance(phi, And):
        return And(phi.arity,
                   _rewrite_negative(phi.left, positive),
                   _rewrite_negative(phi.right, positive))
    if isinstance(phi, Or):
        return Or(phi.arity,
                  _rewrite_negative(phi.left, positive),
                  _rewrite_negative(phi.right, positive))
    if isinstance(phi, Exists):
        return Exists(phi.arity, _rewrite_negative(phi.body, positive))
    if isinstance(phi, Forall):
        body = _rewrite_negative(phi.body, positive)
        if positive:
            return Forall(phi.arity, body)
        return neg(Exists(phi.arity, neg(body)))
    raise TypeError(phi)


def hat_closure(T, mode: str = MODE_FULL) -> FormulaSet:
    """Rewrite universal quantifiers (all of them, or only the negatively
    occurring ones) into not-exists-not form and close under subformulas.
    Iterates to a fixpoint, so the operation is idempotent."""
    if mode not in (MODE_FULL, MODE_NEGATIVE_ONLY):
        raise ValueError(f"bad hat-closure mode {mode!r}")
    current = FormulaSet(T)
    while True:
        out = FormulaSet()
        for phi in current:
            if mode == MODE_FULL:
                rewritten = _rewrite_full(phi)
            else:
                rewritten = _rewrite_negative(phi, True)
            for sub in subformulas(rewritten):
                out.add(sub)
        if out == current:
            return out
        current = out


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

INFIX_RELS = ("<=", "=", "in")

_TOKEN_RE = re.compile(r"\s*(->|<=|=|\(|\)|,|&|\||[A-Za-z_][A-Za-z_0-9]*)")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


_KEYWORDS = {"forall", "exists", "false", "in"}


class _Parser:
    """Recursive descent over the named-variable surface grammar."""

    def __init__(self, text: str, sig: Signature):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.sig = sig

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def here(self):
        return self.tokens[self.pos][1] if self.pos < len(self.tokens) else len(self.tokens)

    def next(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.here())
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", self.here())
        self.pos += 1
        return tok

    def parse(self):
        node = self.formula()
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.peek()!r}", self.here())
        return node

    # precedence (weak to strong): quantifier, ->, |, &
    def formula(self):
        return self.implication()

    def implication(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.next("->")
            right = self.implication()
            return ("implies", left, right)
        return left

    def disjunction(self):
        left = self.conjunction()
        if self.peek() == "|":
            self.next("|")
            right = self.disjunction()
            return ("or", left, right)
        return left

    def conjunction(self):
        left = self.unit()
        if self.peek() == "&":
            self.next("&")
            right = self.conjunction()
            return ("and", left, right)
        return left

    def unit(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.here())
        if tok == "false":
            self.next()
            return ("bottom",)
        if tok in ("forall", "exists"):
            self.next()
            var = self.variable()
            body = self.formula()
            return (tok, var, body)
        if tok == "(":
            self.next("(")
            node = self.formula()
            self.next(")")
            return self.infix_tail(node)
        return self.atom()

    def variable(self):
        pos = self.here()
        tok = self.next()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", tok) or tok in _KEYWORDS:
            raise ParseError(f"expected a variable, found {tok!r}", pos)
        return tok

    def atom(self):
        pos = self.here()
        name = self.next()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name) or name in ("forall", "exists", "false"):
            raise ParseError(f"expected an atom, found {name!r}", pos)
        if self.peek() == "(":
            if name not in self.sig:
                raise ParseError(f"undeclared relation symbol {name!r}", pos)
            self.next("(")
            args = [self.variable()]
            while self.peek() == ",":
                self.next(",")
                args.append(self.variable())
            self.next(")")
            self.check_atom(name, len(args), pos)
            return ("atom", name, args)
        # bare name: must be a variable used infix
        return self.infix_tail(("var", name, pos))

    def infix_tail(self, node):
        if self.peek() in INFIX_RELS:
            op_pos = self.here()
            op = self.next()
            var2 = self.variable()
            var1 = self.var_name(node, op_pos)
            self.check_atom(op, 2, op_pos)
            return ("atom", op, [var1, var2])
        if node[0] == "var":
            raise ParseError(f"dangling variable {node[1]!r}", node[2])
        return node

    @staticmethod
    def var_name(node, pos):
        if node[0] != "var":
            raise ParseError("left operand of an infix relation must be a variable", pos)
        return node[1]

    def check_atom(self, name, nargs, pos):
        if name not in self.sig:
            raise ParseError(f"undeclared relation symbol {name!r}", pos)
        if self.sig.arity(name) != nargs:
            raise ParseError(
                f"relation {name!r} expects {self.sig.arity(name)} arguments, got {nargs}", pos)


_XVAR_RE = re.compile(r"x(\d+)$")


def _free_occurrence_order(node, bound: tuple, acc: list):
    kind = node[0]
    if kind == "bottom":
        return
    if kind == "atom":
        for v in node[2]:
            if v not in bound and v not in acc:
                acc.append(v)
        return
    if kind in ("implies", "and", "or"):
        _free_occurrence_order(node[1], bound, acc)
        _free_occurrence_order(node[2], bound, acc)
        return
    if kind in ("forall", "exists"):
        _free_occurrence_order(node[2], bound + (node[1],), acc)
        return
    raise TypeError(node)


def parse_formula(text: str, sig: Signature) -> Formula:
    """Parse and level-normalize.  Free variables get levels by first
    occurrence; bound variables are alpha-renamed to the level of their
    binder.  A free variable literally named xK must end up at level K."""
    named = _Parser(text, sig).parse()
    free: list[str] = []
    _free_occurrence_order(named, (), free)
    for level, name in enumerate(free):
        m = _XVAR_RE.fullmatch(name)
        if m and int(m.group(1)) != level:
            raise NormalizationError(
                f"free variable {name!r} would be assigned level {level}")
    base = len(free)
    env = {name: level for level, name in enumerate(free)}

    def build(node, env: dict[str, int], arity: int) -> Formula:
        kind = node[0]
        if kind == "bottom":
            return Bottom(arity)
        if kind == "atom":
            return Atom(arity, node[1], tuple(env[v] for v in node[2]))
        if kind == "implies":
            return Implies(arity, build(node[1], env, arity), build(node[2], env, arity))
        if kind == "and":
            return And(arity, build(node[1], env, arity), build(node[2], env, arity))
        if kind == "or":
            return Or(arity, build(node[1], env, arity), build(node[2], env, arity))
        if kind in ("forall", "exists"):
            child_env = dict(env)
            child_env[node[1]] = arity
            body = build(node[2], child_env, arity + 1)
            cls = Forall if kind == "forall" else Exists
            return cls(arity, body)
        raise TypeError(node)

    return build(named, env, base)


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def _var(level: int) -> str:
    return f"x{level}"


_PREC = {Implies: 1, Or: 2, And: 3}


def _render(phi: Formula, ctx_prec: int) -> str:
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Atom):
        if phi.rel in INFIX_RELS and len(phi.args) == 2:
            return f"{_var(phi.args[0])} {phi.rel} {_var(phi.args[1])}"
        return f"{phi.rel}({', '.join(_var(a) for a in phi.args)})"
    if isinstance(phi, (Forall, Exists)):
        word = "forall" if isinstance(phi, Forall) else "exists"
        body = phi.body
        if isinstance(body, Bottom) or (isinstance(body, Atom)
                                        and not (body.rel in INFIX_RELS and len(body.args) == 2)):
            rendered = f"{word} {_var(phi.arity)} {_render(body, 0)}"
        else:
            rendered = f"{word} {_var(phi.arity)} ({_render(body, 0)})"
        return f"({rendered})" if ctx_prec > 0 else rendered
    prec = _PREC[type(phi)]
    op = {Implies: "->", Or: "|", And: "&"}[type(phi)]
    left = _render(phi.left, prec + 1)
    right = _render(phi.right, prec)
    rendered = f"{left} {op} {right}"
    return f"({rendered})" if ctx_prec > prec else rendered


def pretty(phi: Formula) -> str:
    """Canonical text form; parse_formula(pretty(phi)) == phi structurally."""
    return _render(phi, 0)
