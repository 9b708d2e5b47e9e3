"""Finite multisets of actions."""
from __future__ import annotations

from collections import Counter
from typing import Iterable, Mapping


class ActionMultiset(Mapping):
    """Immutable multiset of action names.

    Zero multiplicities are never stored, so the key set is the support.
    ``m | n`` is the additive union and ``m * n`` multiplies multiplicities
    pointwise; a plain set of actions on the right of ``*`` acts as a
    multiset with multiplicity one per member.
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, items: Iterable[str] | Mapping[str, int] = ()):
        if isinstance(items, Mapping):
            counts = {}
            for k, v in items.items():
                if v != int(v) or v < 0:
                    raise ValueError(f"illegal multiplicity {v!r} for {k!r}")
                if v:
                    counts[k] = int(v)
        else:
            counts = dict(Counter(items))
        self._counts = dict(sorted(counts.items()))
        self._hash = hash(tuple(self._counts.items()))

    def __getitem__(self, action: str) -> int:
        return self._counts.get(action, 0)

    def __contains__(self, action) -> bool:
        return action in self._counts

    def __iter__(self):
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, ActionMultiset):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __or__(self, other: "ActionMultiset") -> "ActionMultiset":
        out = Counter(self._counts)
        out.update(dict(other.items()))
        return ActionMultiset(out)

    def __mul__(self, other) -> "ActionMultiset":
        if not isinstance(other, Mapping):
            other = {a: 1 for a in other}
        return ActionMultiset({a: n * other.get(a, 0) for a, n in self._counts.items()})

    def restrict(self, actions) -> "ActionMultiset":
        return ActionMultiset({a: n for a, n in self._counts.items() if a in actions})

    def exclude(self, actions) -> "ActionMultiset":
        return ActionMultiset({a: n for a, n in self._counts.items() if a not in actions})

    @property
    def support(self) -> frozenset:
        return frozenset(self._counts)

    def size(self) -> int:
        return sum(self._counts.values())

    def __repr__(self) -> str:
        return f"ActionMultiset({self._counts!r})"

    def __str__(self) -> str:
        return "{" + ",".join(f"{a}:{n}" for a, n in self._counts.items()) + "}"


EMPTY = ActionMultiset()
