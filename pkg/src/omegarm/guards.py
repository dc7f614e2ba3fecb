"""Boolean guard expressions over atomic propositions.

A guard denotes a set of labels (subsets of the declared atomic
propositions): exactly those labels on which it evaluates to true. The
model file format uses guards to write letters of the 2^AP alphabet
without ever enumerating it.
"""

from __future__ import annotations

from dataclasses import dataclass


class GuardSyntaxError(ValueError):
    """Malformed guard text; carries the 0-based offset of the bad token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownAtomError(ValueError):
    """A guard names an atomic proposition that the model does not declare."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown atomic proposition {name!r} (at offset {position})")
        self.name = name
        self.position = position


@dataclass(frozen=True)
class GuardExpr:
    """Immutable guard expression tree.

    ``kind`` is one of ``true``, ``false``, ``ap``, ``not``, ``and``, ``or``.
    ``name`` is set for ``ap`` nodes; ``args`` holds the operand subtrees of
    the connectives (one for ``not``, two for ``and``/``or``).
    """

    kind: str
    name: str | None = None
    args: tuple["GuardExpr", ...] = ()

    def __str__(self) -> str:
        return guard_to_text(self)


TRUE = GuardExpr("true")
FALSE = GuardExpr("false")


def ap(name: str) -> GuardExpr:
    return GuardExpr("ap", name=name)


def not_(e: GuardExpr) -> GuardExpr:
    return GuardExpr("not", args=(e,))


def and_(a: GuardExpr, b: GuardExpr) -> GuardExpr:
    return GuardExpr("and", args=(a, b))


def or_(a: GuardExpr, b: GuardExpr) -> GuardExpr:
    return GuardExpr("or", args=(a, b))


_IDENT_START = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_")
_IDENT_CONT = _IDENT_START | set("0123456789")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, value, offset) triples; kind is 'ident' or 'op'."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "&|!()":
            tokens.append(("op", c, i))
            i += 1
        elif c in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
        else:
            raise GuardSyntaxError(f"unexpected character {c!r}", i)
    return tokens


class _Parser:
    """Recursive descent over the precedence chain  |  <  &  <  !  < atom."""

    def __init__(self, tokens: list[tuple[str, str, int]], ap_names: set[str], end: int):
        self.tokens = tokens
        self.ap_names = ap_names
        self.pos = 0
        self.end = end

    def peek_op(self, op: str) -> bool:
        if self.pos < len(self.tokens):
            kind, value, _ = self.tokens[self.pos]
            return kind == "op" and value == op
        return False

    def offset(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][2]
        return self.end

    def or_expr(self) -> GuardExpr:
        left = self.and_expr()
        while self.peek_op("|"):
            self.pos += 1
            left = or_(left, self.and_expr())
        return left

    def and_expr(self) -> GuardExpr:
        left = self.unary()
        while self.peek_op("&"):
            self.pos += 1
            left = and_(left, self.unary())
        return left

    def unary(self) -> GuardExpr:
        if self.peek_op("!"):
            self.pos += 1
            return not_(self.unary())
        return self.atom()

    def atom(self) -> GuardExpr:
        if self.pos >= len(self.tokens):
            raise GuardSyntaxError("unexpected end of guard", self.end)
        kind, value, offset = self.tokens[self.pos]
        if kind == "op" and value == "(":
            self.pos += 1
            inner = self.or_expr()
            if not self.peek_op(")"):
                raise GuardSyntaxError("expected ')'", self.offset())
            self.pos += 1
            return inner
        if kind == "ident":
            self.pos += 1
            if value == "true":
                return TRUE
            if value == "false":
                return FALSE
            if value not in self.ap_names:
                raise UnknownAtomError(value, offset)
            return ap(value)
        raise GuardSyntaxError(f"unexpected token {value!r}", offset)


def parse_guard(text: str, ap_names) -> GuardExpr:
    """Parse guard ``text`` against the declared proposition names.

    Grammar, lowest to highest precedence: ``|``, ``&``, ``!``, then atoms
    ``true``/``false``/identifier and parenthesised subexpressions.
    Identifiers are case-sensitive and match [A-Za-z_][A-Za-z0-9_]*.
    """
    if not text.strip():
        raise GuardSyntaxError("empty guard", 0)
    parser = _Parser(_tokenize(text), set(ap_names), len(text))
    expr = parser.or_expr()
    if parser.pos != len(parser.tokens):
        raise GuardSyntaxError(f"trailing input {parser.tokens[parser.pos][1]!r}", parser.offset())
    return expr


def eval_guard(g: GuardExpr, label) -> bool:
    """Evaluate ``g`` on a label (any container of proposition names)."""
    kind = g.kind
    if kind == "ap":
        return g.name in label
    if kind == "and":
        return eval_guard(g.args[0], label) and eval_guard(g.args[1], label)
    if kind == "or":
        return eval_guard(g.args[0], label) or eval_guard(g.args[1], label)
    if kind == "not":
        return not eval_guard(g.args[0], label)
    if kind == "true":
        return True
    if kind == "false":
        return False
    raise ValueError(f"bad guard node kind {kind!r}")


_PREC = {"or": 1, "and": 2, "not": 3, "ap": 4, "true": 4, "false": 4}


def guard_to_text(g: GuardExpr) -> str:
    """Render ``g`` so that parse_guard(guard_to_text(g)) == g."""
    kind = g.kind
    if kind in ("true", "false"):
        return kind
    if kind == "ap":
        return g.name
    if kind == "not":
        inner = g.args[0]
        text = guard_to_text(inner)
        if _PREC[inner.kind] < _PREC["not"]:
            text = f"({text})"
        return "!" + text
    op = " & " if kind == "and" else " | "
    left, right = g.args
    left_text = guard_to_text(left)
    if _PREC[left.kind] < _PREC[kind]:
        left_text = f"({left_text})"
    right_text = guard_to_text(right)
    # parenthesise an equal-precedence right child to keep the tree
    # left-associative on reparse
    if _PREC[right.kind] <= _PREC[kind]:
        right_text = f"({right_text})"
    return left_text + op + right_text


def guard_atoms(g: GuardExpr) -> frozenset[str]:
    """Names of all propositions referenced by ``g``."""
    if g.kind == "ap":
        return frozenset((g.name,))
    out = frozenset()
    for sub in g.args:
        out |= guard_atoms(sub)
    return out
