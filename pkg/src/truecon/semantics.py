"""Proved operational semantics: transitions, enrichment, state spaces, brm, apt, zip."""
from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .multiset import ActionMultiset
from .syntax import (
    ChoiceLeft, ChoiceRight, Choice, IntoPrefix, Nil, OccurrencePath, ParLeft, ParRight,
    Parallel, Prefix, Process, executed_occurrences, is_initial, print_process, subterm_at,
    to_initial,
)
from .terms import Base, Dot, ParL, ParR, PlusL, PlusR, ProofTerm, Syn, act, format_term

DEFAULT_STATE_CAP = 100_000


class EnrichmentError(ValueError):
    """The enrichment walk reached an undefined clause."""


class StateCapExceeded(RuntimeError):
    pass


def state_cap() -> int:
    raw = os.environ.get("TRUECON_STATE_CAP")
    return int(raw) if raw else DEFAULT_STATE_CAP


# Rules

@lru_cache(maxsize=200_000)
def forward_transitions(p: Process) -> Tuple[Tuple[ProofTerm, Process], ...]:
    """All proved forward transitions of ``p``, sorted by printed label."""
    out: List[Tuple[ProofTerm, Process]] = []
    if isinstance(p, Prefix):
        if not p.executed:
            out.append((Base(p.action), Prefix(p.action, True, None, p.continuation)))
        else:
            for t, q in forward_transitions(p.continuation):
                out.append((Dot(p.action, t), Prefix(p.action, True, p.decoration, q)))
    elif isinstance(p, Choice):
        if is_initial(p.right):
            out.extend((PlusL(t), Choice(q, p.right)) for t, q in forward_transitions(p.left))
        if is_initial(p.left):
            out.extend((PlusR(t), Choice(p.left, q)) for t, q in forward_transitions(p.right))
    elif isinstance(p, Parallel):
        L = p.sync
        left, right = forward_transitions(p.left), forward_transitions(p.right)
        for t, q in left:
            if act(t) not in L:
                out.append((ParL(L, t), Parallel(q, p.right, L)))
        for t, q in right:
            if act(t) not in L:
                out.append((ParR(L, t), Parallel(p.left, q, L)))
        for t1, q1 in left:
            a = act(t1)
            if a not in L:
                continue
            for t2, q2 in right:
                if act(t2) == a:
                    label = Syn(t1, t2, L)
                    out.append((label, enr(Parallel(q1, q2, L), label)))
    out.sort(key=lambda tq: format_term(tq[0]))
    return tuple(out)


def enr(p: Process, sync_term: ProofTerm) -> Process:
    """Install ``sync_term`` as decoration on every prefix it reaches in ``p``."""
    if not isinstance(sync_term, Syn):
        raise EnrichmentError("enrichment needs a synchronization term")
    return enr_walk(p, sync_term, sync_term)


def enr_walk(p: Process, theta: ProofTerm, bar: Syn) -> Process:
    if isinstance(p, Nil):
        return p
    if isinstance(p, Prefix):
        if not p.executed:
            raise EnrichmentError(f"walk reached unexecuted prefix {p.action!r}")
        if isinstance(theta, Base) and theta.action == p.action:
            return Prefix(p.action, True, bar, p.continuation)
        if isinstance(theta, Dot) and theta.action == p.action:
            return Prefix(p.action, True, p.decoration, enr_walk(p.continuation, theta.inner, bar))
        raise EnrichmentError(f"term {format_term(theta)} does not address prefix {p.action!r}")
    if isinstance(p, Choice):
        if isinstance(theta, PlusL):
            return Choice(enr_walk(p.left, theta.inner, bar), p.right)
        if isinstance(theta, PlusR):
            return Choice(p.left, enr_walk(p.right, theta.inner, bar))
        raise EnrichmentError(f"term {format_term(theta)} does not address a choice")
    if isinstance(theta, ParL) and theta.sync == p.sync:
        return Parallel(enr_walk(p.left, theta.inner, bar), p.right, p.sync)
    if isinstance(theta, ParR) and theta.sync == p.sync:
        return Parallel(p.left, enr_walk(p.right, theta.inner, bar), p.sync)
    if isinstance(theta, Syn) and theta.sync == p.sync:
        return Parallel(enr_walk(p.left, theta.left, bar),
                        enr_walk(p.right, theta.right, bar), p.sync)
    raise EnrichmentError(f"term {format_term(theta)} does not address a parallel")


# State spaces

@dataclass
class ProvedLTS:
    """Reachable fragment of the proved transition relation from an initial root.

    States are indexed in BFS order with the root at 0. Backward moves are the
    same edges read from target to source.
    """
    states: List[Process]
    edges: List[Tuple[int, ProofTerm, int]]
    index: Dict[Process, int] = field(repr=False)
    out: List[List[Tuple[ProofTerm, int]]] = field(repr=False)
    inc: List[List[Tuple[ProofTerm, int]]] = field(repr=False)

    @property
    def root(self) -> Process:
        return self.states[0]

    def __len__(self) -> int:
        return len(self.states)

    def state_id(self, p: Process) -> int:
        try:
            return self.index[p]
        except KeyError:
            raise KeyError(f"not a state of this LTS: {print_process(p)}") from None

    def maximal_paths(self) -> List[List[int]]:
        paths: List[List[int]] = []

        def walk(i: int, acc: List[int]):
            if not self.out[i]:
                paths.append(acc)
                return
            for _, j in self.out[i]:
                walk(j, acc + [j])

        walk(0, [0])
        return paths

    def path_to(self, target: int) -> List[Tuple[int, ProofTerm, int]]:
        """A shortest forward path from the root, as a list of edges."""
        parent: Dict[int, Tuple[int, ProofTerm]] = {0: None}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            if i == target:
                break
            for t, j in self.out[i]:
                if j not in parent:
                    parent[j] = (i, t)
                    queue.append(j)
        if target not in parent:
            raise KeyError(f"state {target} unreachable")
        path = []
        while parent[target] is not None:
            i, t = parent[target]
            path.append((i, t, target))
            target = i
        return path[::-1]

    def to_json(self) -> dict:
        return {
            "states": [print_process(s) for s in self.states],
            "root": 0,
            "edges": [{"src": i, "label": format_term(t), "dst": j} for i, t, j in self.edges],
        }

    def to_dot(self) -> str:
        lines = ["digraph lts {", "  node [shape=circle];"]
        for i, s in enumerate(self.states):
            shape = ', shape=doublecircle' if i == 0 else ''
            lines.append(f'  s{i} [label="{i}", tooltip={json.dumps(print_process(s))}{shape}];')
        for i, t, j in self.edges:
            lines.append(f"  s{i} -> s{j} [label={json.dumps(format_term(t))}];")
        lines.append("}")
        return "\n".join(lines)


def build_lts(p0: Process, cap: Optional[int] = None) -> ProvedLTS:
    if not is_initial(p0):
        raise ValueError("the root of a proved LTS must be initial")
    cap = state_cap() if cap is None else cap
    states = [p0]
    index = {p0: 0}
    edges: List[Tuple[int, ProofTerm, int]] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for t, q in forward_transitions(states[i]):
            j = index.get(q)
            if j is None:
                if len(states) >= cap:
                    raise StateCapExceeded(f"more than {cap} states")
                j = len(states)
                index[q] = j
                states.append(q)
                queue.append(j)
            edges.append((i, t, j))
    out: List[List[Tuple[ProofTerm, int]]] = [[] for _ in states]
    inc: List[List[Tuple[ProofTerm, int]]] = [[] for _ in states]
    for i, t, j in edges:
        out[i].append((t, j))
        inc[j].append((t, i))
    return ProvedLTS(states, edges, index, out, inc)


def incoming_transitions(lts: ProvedLTS, p: Process) -> List[Tuple[Process, ProofTerm]]:
    j = lts.state_id(p)
    return [(lts.states[i], t) for t, i in lts.inc[j]]


# Backward ready multisets

def brm_process(p: Process) -> ActionMultiset:
    """Actions of the transitions that can be undone from ``p``.

    Each undoable step is found syntactically: an executed prefix whose
    continuation is still initial is on top of its local history. Under a
    parallel composition, steps on a synchronized action can only be undone
    together with the partner step carrying the same decoration.
    """
    return ActionMultiset(a for a, _ in _ready(p))


def _ready(p: Process) -> List[Tuple[str, object]]:
    if isinstance(p, Nil):
        return []
    if isinstance(p, Prefix):
        if not p.executed:
            return []
        if is_initial(p.continuation):
            # undecorated steps never pair with anything, so give each a unique key
            return [(p.action, p.decoration if p.decoration is not None else object())]
        return _ready(p.continuation)
    if isinstance(p, Choice):
        if not is_initial(p.left):
            return _ready(p.left)
        if not is_initial(p.right):
            return _ready(p.right)
        return []
    left, right = _ready(p.left), _ready(p.right)
    out = [item for item in left + right if item[0] not in p.sync]
    partners = {key for a, key in right if a in p.sync}
    out.extend((a, key) for a, key in left if a in p.sync and key in partners)
    return out


def brm_by_clauses(p: Process) -> ActionMultiset:
    """The multiplicative parallel clause, kept for comparison with ``brm_process``."""
    if isinstance(p, Nil):
        return ActionMultiset()
    if isinstance(p, Prefix):
        if not p.executed:
            return ActionMultiset()
        return ActionMultiset([p.action]) if is_initial(p.continuation) else brm_by_clauses(p.continuation)
    if isinstance(p, Choice):
        if not is_initial(p.left):
            return brm_by_clauses(p.left)
        if not is_initial(p.right):
            return brm_by_clauses(p.right)
        return ActionMultiset()
    m1, m2 = brm_by_clauses(p.left), brm_by_clauses(p.right)
    return m1.exclude(p.sync) | m2.exclude(p.sync) | (m1 * m2).restrict(p.sync)


# Event identities of executed prefixes

def wrap_path(path: OccurrencePath, inner: ProofTerm) -> ProofTerm:
    t = inner
    for step in reversed(path):
        if isinstance(step, IntoPrefix):
            t = Dot(step.action, t)
        elif isinstance(step, ChoiceLeft):
            t = PlusL(t)
        elif isinstance(step, ChoiceRight):
            t = PlusR(t)
        elif isinstance(step, ParLeft):
            t = ParL(step.sync, t)
        else:
            t = ParR(step.sync, t)
    return t


def _addresses(t: ProofTerm, steps: OccurrencePath, action: str) -> bool:
    """Does ``t``, read from the top of ``steps``, lead exactly to the occurrence?"""
    for k, step in enumerate(steps):
        if isinstance(step, IntoPrefix):
            if not (isinstance(t, Dot) and t.action == step.action):
                return False
        elif isinstance(step, ChoiceLeft):
            if not isinstance(t, PlusL):
                return False
        elif isinstance(step, ChoiceRight):
            if not isinstance(t, PlusR):
                return False
        elif isinstance(t, Syn) and t.sync == step.sync:
            return _addresses(t.left if isinstance(step, ParLeft) else t.right,
                              steps[k + 1:], action)
        elif isinstance(step, ParLeft):
            if not (isinstance(t, ParL) and t.sync == step.sync):
                return False
        else:
            if not (isinstance(t, ParR) and t.sync == step.sync):
                return False
        t = t.inner
    return isinstance(t, Base) and t.action == action


def apt(occ: OccurrencePath, p: Process) -> ProofTerm:
    """Proof term of the transition that executed the prefix at ``occ``.

    A decoration records the synchronization at the parallel where it took
    place; the operators above that parallel are recovered from the path.
    """
    target = subterm_at(p, occ)
    if not (isinstance(target, Prefix) and target.executed):
        raise ValueError("occurrence does not address an executed prefix")
    xi = target.decoration
    if xi is None:
        return wrap_path(occ, Base(target.action))
    for k, step in enumerate(occ):
        if isinstance(step, (ParLeft, ParRight)) and step.sync == xi.sync \
                and _addresses(xi, occ[k:], target.action):
            return wrap_path(occ[:k], xi)
    raise ValueError(f"decoration {format_term(xi)} does not match its position")


def history_configuration(p: Process) -> FrozenSet[ProofTerm]:
    return frozenset(apt(occ, p) for occ, _ in executed_occurrences(p))


def path_labels(lts: ProvedLTS, target: int) -> List[ProofTerm]:
    return [t for _, t, _ in lts.path_to(target)]


# Interleaving of component histories

def zip_interleave(s1: Sequence[ProofTerm], s2: Sequence[ProofTerm], L) -> List[ProofTerm]:
    """Merge two component histories into a history of their parallel composition.

    The synchronizing clause advances both sequences.
    """
    L = frozenset(L)
    s1, s2 = list(s1), list(s2)
    out: List[ProofTerm] = []
    i = j = 0
    while True:
        r1, r2 = len(s1) - i, len(s2) - j
        h1 = s1[i] if r1 else None
        h2 = s2[j] if r2 else None
        a1 = act(h1) if r1 else None
        a2 = act(h2) if r2 else None
        if r1 and a1 not in L and (not r2 or a2 in L or r1 >= r2):
            out.append(ParL(L, h1))
            i += 1
        elif r2 and a2 not in L and (not r1 or a1 in L or r1 < r2):
            out.append(ParR(L, h2))
            j += 1
        elif r1 and r2 and a1 == a2 and a1 in L:
            out.append(Syn(h1, h2, L))
            i += 1
            j += 1
        else:
            return out


def project(labels: Sequence[ProofTerm], L) -> Tuple[List[ProofTerm], List[ProofTerm]]:
    """Split a history of a parallel composition into its two component histories."""
    left: List[ProofTerm] = []
    right: List[ProofTerm] = []
    for t in labels:
        if isinstance(t, ParL) and t.sync == L:
            left.append(t.inner)
        elif isinstance(t, ParR) and t.sync == L:
            right.append(t.inner)
        elif isinstance(t, Syn) and t.sync == L:
            left.append(t.left)
            right.append(t.right)
        else:
            raise ValueError(f"{format_term(t)} is not a move of this parallel")
    return left, right


@lru_cache(maxsize=512)
def cached_lts(root: Process) -> ProvedLTS:
    """``build_lts`` memoized on the (initial) root."""
    return build_lts(root)


def lts_and_state(p: Process) -> Tuple[ProvedLTS, int]:
    lts = cached_lts(to_initial(p))
    return lts, lts.state_id(p)
