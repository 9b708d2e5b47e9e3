"""Formula syntax for the backward ready multiset logic (BRM) and event identifier logic (EIL)."""
from __future__ import annotations

import re
from typing import FrozenSet, Union

from ..multiset import ActionMultiset
from ..terms import node


@node
class Top:
    pass


@node
class Not:
    body: "Formula"


@node
class And:
    left: "Formula"
    right: "Formula"


# BRM only

@node
class Atom:
    multiset: ActionMultiset


@node
class Fwd:
    action: str
    body: "Formula"


@node
class Bwd:
    action: str
    body: "Formula"


# EIL only

@node
class Bind:
    """``<x:a> f``: fire an a-event and name it x."""
    ident: str
    action: str
    body: "Formula"


@node
class Declare:
    """``(x:a) f``: name an a-event that already happened."""
    ident: str
    action: str
    body: "Formula"


@node
class Back:
    """``<<x>> f``: undo the event named x."""
    ident: str
    body: "Formula"


TRUE = Top()
BrmFormula = Union[Top, Not, And, Atom, Fwd, Bwd]
EilFormula = Union[Top, Not, And, Bind, Declare, Back]
Formula = Union[Top, Not, And, Atom, Fwd, Bwd, Bind, Declare, Back]


def conj(parts) -> "Formula":
    """Right-nested conjunction; the empty conjunction is ``true``."""
    parts = list(parts)
    if not parts:
        return TRUE
    f = parts[-1]
    for p in reversed(parts[:-1]):
        f = And(p, f)
    return f


def fid(f: Formula) -> FrozenSet[str]:
    if isinstance(f, (Top, Atom)):
        return frozenset()
    if isinstance(f, Not):
        return fid(f.body)
    if isinstance(f, And):
        return fid(f.left) | fid(f.right)
    if isinstance(f, (Bind, Declare)):
        return fid(f.body) - {f.ident}
    if isinstance(f, Back):
        return fid(f.body) | {f.ident}
    if isinstance(f, (Fwd, Bwd)):
        return fid(f.body)
    raise TypeError(f"not a formula: {f!r}")


def depth(f: Formula) -> int:
    if isinstance(f, (Top, Atom)):
        return 0
    if isinstance(f, And):
        return 1 + max(depth(f.left), depth(f.right))
    return 1 + depth(f.body)


depth_brm = depth
depth_eil = depth


def actions_in(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Top):
        return frozenset()
    if isinstance(f, Atom):
        return f.multiset.support
    if isinstance(f, And):
        return actions_in(f.left) | actions_in(f.right)
    own = {f.action} if isinstance(f, (Fwd, Bwd, Bind, Declare)) else set()
    return actions_in(f.body) | own


def atoms_of(f: Formula):
    if isinstance(f, Atom):
        yield f.multiset
    elif isinstance(f, And):
        yield from atoms_of(f.left)
        yield from atoms_of(f.right)
    elif not isinstance(f, Top):
        yield from atoms_of(f.body)


def rename(f: Formula, sigma: dict) -> Formula:
    """Rename free identifiers of an EIL formula; bound ones are left alone."""
    if isinstance(f, (Top, Atom)):
        return f
    if isinstance(f, Not):
        return Not(rename(f.body, sigma))
    if isinstance(f, And):
        return And(rename(f.left, sigma), rename(f.right, sigma))
    if isinstance(f, Back):
        return Back(sigma.get(f.ident, f.ident), rename(f.body, sigma))
    if isinstance(f, (Bind, Declare)):
        inner = {k: v for k, v in sigma.items() if k != f.ident}
        if f.ident in inner.values():
            raise ValueError(f"renaming would capture {f.ident!r}")
        return type(f)(f.ident, f.action, rename(f.body, inner))
    return type(f)(f.action, rename(f.body, sigma))


# Printing

def format_formula(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Atom):
        return str(f.multiset)
    if isinstance(f, And):
        right = format_formula(f.right)
        if isinstance(f.right, And):
            right = f"({right})"
        return f"{format_formula(f.left)} & {right}"
    if isinstance(f, Not):
        return "!" + _unary_operand(f.body)
    if isinstance(f, Fwd):
        head = f"<{f.action}>"
    elif isinstance(f, Bwd):
        head = f"<{f.action}!>"
    elif isinstance(f, Bind):
        head = f"<{f.ident}:{f.action}>"
    elif isinstance(f, Declare):
        head = f"({f.ident}:{f.action})"
    else:
        head = f"<<{f.ident}>>"
    return head + " " + _unary_operand(f.body)


def _unary_operand(f: Formula) -> str:
    text = format_formula(f)
    return f"({text})" if isinstance(f, And) else text


# Parsing

class FormulaError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(<<|>>|[{}():,&!<>])|([A-Za-z_][A-Za-z0-9_]*)|(\d+))")


def _tokens(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r} at column {pos + 1}")
        kind = "sym" if m.group(1) else "id" if m.group(2) else "num"
        out.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _FormulaParser:
    def __init__(self, text: str, logic: str):
        self.toks = _tokens(text)
        self.i = 0
        self.logic = logic

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind == "end":
            raise FormulaError(f"expected {value!r} at column {pos + 1}, found {v or 'end of input'!r}")

    def ident(self) -> str:
        kind, v, pos = self.take()
        if kind != "id":
            raise FormulaError(f"expected a name at column {pos + 1}")
        return v

    def formula(self):
        f = self.unary()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, v, pos = self.peek()
        if kind == "id" and v == "true":
            self.take()
            return TRUE
        if v == "!" and kind == "sym":
            self.take()
            return Not(self.unary())
        if v == "{" and self.logic == "brm":
            return Atom(self.multiset())
        if v == "<<" and self.logic == "eil":
            self.take()
            x = self.ident()
            self.expect(">>")
            return Back(x, self.unary())
        if v == "<":
            self.take()
            if self.logic == "brm":
                a = self.ident()
                backward = self.peek()[1] == "!"
                if backward:
                    self.take()
                self.expect(">")
                body = self.unary()
                return Bwd(a, body) if backward else Fwd(a, body)
            x = self.ident()
            self.expect(":")
            a = self.ident()
            self.expect(">")
            return Bind(x, a, self.unary())
        if v == "(":
            if self.logic == "eil" and self.peek(1)[0] == "id" and self.peek(2)[1] == ":":
                self.take()
                x = self.ident()
                self.expect(":")
                a = self.ident()
                self.expect(")")
                return Declare(x, a, self.unary())
            self.take()
            f = self.formula()
            self.expect(")")
            return f
        raise FormulaError(f"unexpected {v or 'end of input'!r} at column {pos + 1}")

    def multiset(self) -> ActionMultiset:
        self.expect("{")
        counts = {}
        if self.peek()[1] != "}":
            while True:
                a = self.ident()
                self.expect(":")
                kind, v, pos = self.take()
                if kind != "num":
                    raise FormulaError(f"expected a multiplicity at column {pos + 1}")
                if a in counts:
                    raise FormulaError(f"action {a!r} listed twice in multiset")
                counts[a] = int(v)
                if self.peek()[1] != ",":
                    break
                self.take()
        self.expect("}")
        return ActionMultiset(counts)


def parse_formula(text: str, logic: str):
    if logic not in ("brm", "eil"):
        raise ValueError("logic must be 'brm' or 'eil'")
    p = _FormulaParser(text, logic)
    f = p.formula()
    kind, v, pos = p.peek()
    if kind != "end":
        raise FormulaError(f"unexpected trailing {v!r} at column {pos + 1}")
    return f


def parse_brm(text: str) -> BrmFormula:
    return parse_formula(text, "brm")


def parse_eil(text: str) -> EilFormula:
    return parse_formula(text, "eil")
