"""Proof terms: transition labels that double as event identities.

A proof term is an action wrapped in the operator symbols crossed on the way
from the root of a process to the prefix that fired it.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import FrozenSet, Optional, Union

TAU = "tau"


def node(cls):
    """Frozen dataclass with a memoized structural hash.

    Process terms and proof terms are hashed over and over while building
    state spaces, so the hash is computed once per instance.
    """
    cls = dataclass(frozen=True)(cls)
    names = tuple(f.name for f in fields(cls))
    generated_eq = cls.__eq__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if other.__class__ is not self.__class__ or hash(self) != hash(other):
            return False
        return generated_eq(self, other)

    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    return cls


def syncset(actions) -> FrozenSet[str]:
    s = frozenset(actions)
    if TAU in s:
        raise ValueError("tau cannot appear in a synchronization set")
    return s


@node
class Base:
    action: str


@node
class Dot:
    action: str
    inner: "ProofTerm"


@node
class PlusL:
    inner: "ProofTerm"


@node
class PlusR:
    inner: "ProofTerm"


@node
class ParL:
    sync: FrozenSet[str]
    inner: "ProofTerm"


@node
class ParR:
    sync: FrozenSet[str]
    inner: "ProofTerm"


@node
class Syn:
    left: "ProofTerm"
    right: "ProofTerm"
    sync: FrozenSet[str]


ProofTerm = Union[Base, Dot, PlusL, PlusR, ParL, ParR, Syn]


def act(t: ProofTerm) -> Optional[str]:
    """The action carried by a proof term, or None where it is undefined."""
    while not isinstance(t, (Base, Syn)):
        t = t.inner
    if isinstance(t, Base):
        return t.action
    left = act(t.left)
    if left is not None and left == act(t.right):
        return left
    return None


def format_actions(actions) -> str:
    return ",".join(sorted(actions))


def format_term(t: ProofTerm) -> str:
    """Render a proof term in the ASCII label syntax used by the parsers."""
    if isinstance(t, Base):
        return t.action
    if isinstance(t, Dot):
        return f".{t.action} {format_term(t.inner)}"
    if isinstance(t, PlusL):
        return "+L" + format_term(t.inner)
    if isinstance(t, PlusR):
        return "+R" + format_term(t.inner)
    if isinstance(t, ParL):
        return f"|L[{format_actions(t.sync)}]" + format_term(t.inner)
    if isinstance(t, ParR):
        return f"|R[{format_actions(t.sync)}]" + format_term(t.inner)
    return f"<{format_term(t.left)},{format_term(t.right)}>[{format_actions(t.sync)}]"


def term_key(t: ProofTerm) -> str:
    """Total order on proof terms, used wherever output must be deterministic."""
    return format_term(t)
