"""Process terms of the reversible calculus: AST, grammar, and structural predicates."""
from __future__ import annotations

import re
from functools import lru_cache
from typing import FrozenSet, List, Optional, Tuple, Union

from .terms import (
    TAU, Base, Dot, ParL, ParR, PlusL, PlusR, ProofTerm, Syn, format_actions,
    format_term, node,
)

ACTION_RE = re.compile(r"[a-z][A-Za-z0-9_]*")


@node
class Nil:
    pass


@node
class Prefix:
    action: str
    executed: bool
    decoration: Optional[Syn]
    continuation: "Process"


@node
class Choice:
    left: "Process"
    right: "Process"


@node
class Parallel:
    left: "Process"
    right: "Process"
    sync: FrozenSet[str]


Process = Union[Nil, Prefix, Choice, Parallel]

NIL = Nil()


def prefix(action: str, cont: "Process" = NIL, executed: bool = False, decoration=None) -> Prefix:
    return Prefix(action, executed, decoration, cont)


def par(left, right, sync=()) -> Parallel:
    return Parallel(left, right, frozenset(sync))


# Occurrence paths

@node
class IntoPrefix:
    action: str


@node
class ChoiceLeft:
    pass


@node
class ChoiceRight:
    pass


@node
class ParLeft:
    sync: FrozenSet[str]


@node
class ParRight:
    sync: FrozenSet[str]


Step = Union[IntoPrefix, ChoiceLeft, ChoiceRight, ParLeft, ParRight]
OccurrencePath = Tuple[Step, ...]


def format_path(path: OccurrencePath) -> str:
    parts = []
    for s in path:
        if isinstance(s, IntoPrefix):
            parts.append(s.action + ".")
        elif isinstance(s, ChoiceLeft):
            parts.append("+L")
        elif isinstance(s, ChoiceRight):
            parts.append("+R")
        elif isinstance(s, ParLeft):
            parts.append(f"|L[{format_actions(s.sync)}]")
        else:
            parts.append(f"|R[{format_actions(s.sync)}]")
    return " ".join(parts) if parts else "<root>"


def subterm_at(p: Process, path: OccurrencePath) -> Process:
    for step in path:
        if isinstance(step, IntoPrefix):
            if not isinstance(p, Prefix) or p.action != step.action:
                raise ValueError("path does not match process")
            p = p.continuation
        elif isinstance(step, (ChoiceLeft, ChoiceRight)):
            if not isinstance(p, Choice):
                raise ValueError("path does not match process")
            p = p.left if isinstance(step, ChoiceLeft) else p.right
        else:
            if not isinstance(p, Parallel) or p.sync != step.sync:
                raise ValueError("path does not match process")
            p = p.left if isinstance(step, ParLeft) else p.right
    return p


# Structural predicates

@lru_cache(maxsize=None)
def is_initial(p: Process) -> bool:
    if isinstance(p, Nil):
        return True
    if isinstance(p, Prefix):
        return not p.executed and is_initial(p.continuation)
    return is_initial(p.left) and is_initial(p.right)


@lru_cache(maxsize=None)
def is_well_formed(p: Process) -> bool:
    if isinstance(p, Nil):
        return True
    if isinstance(p, Prefix):
        if not p.executed:
            return p.decoration is None and is_initial(p.continuation)
        return is_well_formed(p.continuation)
    if isinstance(p, Choice):
        return (is_well_formed(p.left) and is_well_formed(p.right)
                and (is_initial(p.left) or is_initial(p.right)))
    return TAU not in p.sync and is_well_formed(p.left) and is_well_formed(p.right)


@lru_cache(maxsize=None)
def to_initial(p: Process) -> Process:
    if isinstance(p, Nil):
        return p
    if isinstance(p, Prefix):
        cont = to_initial(p.continuation)
        if not p.executed and cont is p.continuation:
            return p
        return Prefix(p.action, False, None, cont)
    left, right = to_initial(p.left), to_initial(p.right)
    if left is p.left and right is p.right:
        return p
    if isinstance(p, Choice):
        return Choice(left, right)
    return Parallel(left, right, p.sync)


def executed_occurrences(p: Process) -> List[Tuple[OccurrencePath, Prefix]]:
    """Positions of executed prefixes, in left-to-right preorder."""
    out: List[Tuple[OccurrencePath, Prefix]] = []

    def walk(q: Process, path: tuple):
        if isinstance(q, Prefix):
            if q.executed:
                out.append((path, q))
                walk(q.continuation, path + (IntoPrefix(q.action),))
        elif isinstance(q, Choice):
            walk(q.left, path + (ChoiceLeft(),))
            walk(q.right, path + (ChoiceRight(),))
        elif isinstance(q, Parallel):
            walk(q.left, path + (ParLeft(q.sync),))
            walk(q.right, path + (ParRight(q.sync),))

    walk(p, ())
    return out


def actions_of(p: Process) -> FrozenSet[str]:
    if isinstance(p, Nil):
        return frozenset()
    if isinstance(p, Prefix):
        return actions_of(p.continuation) | {p.action}
    return actions_of(p.left) | actions_of(p.right)


def size(p: Process) -> int:
    if isinstance(p, Nil):
        return 1
    if isinstance(p, Prefix):
        return 1 + size(p.continuation)
    return 1 + size(p.left) + size(p.right)


# Printing

def print_process(p: Process) -> str:
    """Canonical text; parses back to an equal term."""
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Prefix):
        head = p.action
        if p.executed:
            head += "!"
            if p.decoration is not None:
                head += format_term(p.decoration)
        return head + "." + _wrap(p.continuation, (Choice, Parallel))
    if isinstance(p, Choice):
        return print_process(p.left) + " + " + _wrap(p.right, (Choice,))
    return (_wrap(p.left, (Choice,)) + f" |[{format_actions(p.sync)}]| "
            + _wrap(p.right, (Choice, Parallel)))


def _wrap(p: Process, kinds) -> str:
    text = print_process(p)
    return f"({text})" if isinstance(p, kinds) else text


# Parsing

class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line, self.column = line, col


class _Reader:
    """Character-level cursor shared by the process and proof-term parsers."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, lit: str) -> bool:
        self.skip()
        return self.text.startswith(lit, self.pos)

    def accept(self, lit: str) -> bool:
        if self.peek(lit):
            self.pos += len(lit)
            return True
        return False

    def expect(self, lit: str):
        if not self.accept(lit):
            self.fail(f"expected {lit!r}")

    def ident(self) -> str:
        self.skip()
        m = ACTION_RE.match(self.text, self.pos)
        if not m:
            self.fail("expected an action name")
        self.pos = m.end()
        return m.group()

    def at_ident(self) -> bool:
        self.skip()
        return bool(ACTION_RE.match(self.text, self.pos))

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def fail(self, message: str):
        self.skip()
        found = self.text[self.pos:self.pos + 8] or "end of input"
        raise ParseError(f"{message}, found {found!r}", self.text, self.pos)

    def actlist(self, close: str) -> FrozenSet[str]:
        acts = []
        if not self.peek(close):
            acts.append(self.ident())
            while self.accept(","):
                acts.append(self.ident())
        self.expect(close)
        return frozenset(acts)

    def syncset(self, close: str) -> FrozenSet[str]:
        start = self.pos
        acts = self.actlist(close)
        if TAU in acts:
            raise ParseError("tau cannot appear in a synchronization set", self.text, start)
        return acts

    def pterm(self) -> ProofTerm:
        if self.accept("."):
            a = self.ident()
            return Dot(a, self.pterm())
        if self.accept("+L"):
            return PlusL(self.pterm())
        if self.accept("+R"):
            return PlusR(self.pterm())
        if self.accept("|L["):
            return ParL(self.syncset("]"), self.pterm())
        if self.accept("|R["):
            return ParR(self.syncset("]"), self.pterm())
        if self.accept("<"):
            left = self.pterm()
            self.expect(",")
            right = self.pterm()
            self.expect(">")
            self.expect("[")
            return Syn(left, right, self.syncset("]"))
        return Base(self.ident())

    def proc(self) -> Process:
        p = self.par_level()
        while self.accept("+"):
            p = Choice(p, self.par_level())
        return p

    def par_level(self) -> Process:
        p = self.pre()
        while self.accept("|["):
            sync = self.syncset("]|")
            p = Parallel(p, self.pre(), sync)
        return p

    def pre(self) -> Process:
        if self.accept("("):
            p = self.proc()
            self.expect(")")
            return p
        if self.peek("0") and not self.at_ident():
            self.pos += 1
            return NIL
        a = self.ident()
        executed = self.accept("!")
        deco = None
        if executed and self.peek("<"):
            start = self.pos
            deco = self.pterm()
            if not isinstance(deco, Syn):
                raise ParseError("decoration must be a synchronization pair", self.text, start)
        self.expect(".")
        return Prefix(a, executed, deco, self.pre())


def parse_process(text: str) -> Process:
    r = _Reader(text)
    p = r.proc()
    if not r.at_end():
        r.fail("unexpected trailing input")
    _check_decorations(p, frozenset(), text)
    return p


def parse_term(text: str) -> ProofTerm:
    r = _Reader(text)
    t = r.pterm()
    if not r.at_end():
        r.fail("unexpected trailing input")
    return t


def _check_decorations(p: Process, enclosing: FrozenSet[FrozenSet[str]], text: str):
    if isinstance(p, Prefix):
        if p.decoration is not None and p.decoration.sync not in enclosing:
            raise ParseError(
                f"decoration on {p.action!r} names a synchronization set "
                f"[{format_actions(p.decoration.sync)}] with no enclosing parallel", text, 0)
        _check_decorations(p.continuation, enclosing, text)
    elif isinstance(p, Choice):
        _check_decorations(p.left, enclosing, text)
        _check_decorations(p.right, enclosing, text)
    elif isinstance(p, Parallel):
        inner = enclosing | {p.sync}
        _check_decorations(p.left, inner, text)
        _check_decorations(p.right, inner, text)
