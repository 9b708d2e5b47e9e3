"""Stable configuration structures and the denotational semantics of processes."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from .multiset import ActionMultiset
from .semantics import history_configuration
from .syntax import Choice, Nil, Parallel, Prefix, Process, is_well_formed, to_initial
from .terms import Base, Dot, ParL, ParR, PlusL, PlusR, Syn, act, format_term

EventId = Hashable
Configuration = FrozenSet[EventId]


def event_key(e: EventId) -> str:
    return e if isinstance(e, str) else format_term(e)


def _popcount(m: int) -> int:
    return bin(m).count("1")


class ConfigStructure:
    """A finite configuration structure ``(events, configurations, labels)``.

    Internally every event gets a bit position (in ``event_key`` order) and
    every configuration is an int mask, which keeps the subset-heavy
    algorithms (causality, bisimulation games) cheap.
    """

    def __init__(self, events: Iterable[EventId], configurations: Iterable[Iterable[EventId]],
                 labels: Mapping[EventId, str]):
        self.events: Tuple[EventId, ...] = tuple(sorted(set(events), key=event_key))
        self.labels: Dict[EventId, str] = {e: labels[e] for e in self.events if e in labels}
        self.bit = {e: i for i, e in enumerate(self.events)}
        masks = set()
        for x in configurations:
            m = 0
            for e in x:
                if e not in self.bit:
                    raise ValueError(f"configuration mentions unknown event {event_key(e)!r}")
                m |= 1 << self.bit[e]
            masks.add(m)
        self.masks: Tuple[int, ...] = tuple(sorted(masks, key=lambda m: (_popcount(m), m)))
        self.index: Dict[int, int] = {m: k for k, m in enumerate(self.masks)}
        missing = [e for e in self.events if e not in self.labels
                   and any(m >> self.bit[e] & 1 for m in self.masks)]
        if missing:
            raise ValueError(f"unlabeled events: {[event_key(e) for e in missing]}")

    # conversions

    def to_set(self, m: int) -> Configuration:
        return frozenset(e for e, i in self.bit.items() if m >> i & 1)

    def to_mask(self, x: Iterable[EventId]) -> int:
        m = 0
        for e in x:
            m |= 1 << self.bit[e]
        return m

    def members(self, m: int) -> List[int]:
        out = []
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return out

    @property
    def configurations(self) -> FrozenSet[Configuration]:
        return frozenset(self.to_set(m) for m in self.masks)

    def label_of(self, i: int) -> str:
        return self.labels[self.events[i]]

    def __contains__(self, x) -> bool:
        m = x if isinstance(x, int) else self.to_mask(x)
        return m in self.index

    def __eq__(self, other) -> bool:
        return (isinstance(other, ConfigStructure) and self.labels == other.labels
                and self.configurations == other.configurations
                and set(self.events) == set(other.events))

    def __hash__(self):
        return hash((frozenset(self.events), self.configurations))

    def __repr__(self) -> str:
        return f"ConfigStructure({len(self.events)} events, {len(self.masks)} configurations)"

    # transitions

    @cached_property
    def succ(self) -> List[List[Tuple[int, int]]]:
        """For each configuration index, the (event bit, target index) of its outgoing transitions."""
        out: List[List[Tuple[int, int]]] = [[] for _ in self.masks]
        for k, m in enumerate(self.masks):
            for i in range(len(self.events)):
                if not m >> i & 1:
                    j = self.index.get(m | 1 << i)
                    if j is not None:
                        out[k].append((i, j))
        return out

    @cached_property
    def pred(self) -> List[List[Tuple[int, int]]]:
        inc: List[List[Tuple[int, int]]] = [[] for _ in self.masks]
        for k, lst in enumerate(self.succ):
            for i, j in lst:
                inc[j].append((i, k))
        return inc

    def sub_indices(self, k: int) -> List[int]:
        return self._subs[k]

    @cached_property
    def _subs(self) -> List[List[int]]:
        masks = self.masks
        return [[j for j, y in enumerate(masks) if y & ~x == 0] for x in masks]

    def cause_masks(self, k: int) -> Dict[int, int]:
        """For each event bit in configuration ``k``, the set of events at or below it."""
        return self._causes[k] if k in self._causes else self._compute_causes(k)

    @cached_property
    def _causes(self) -> Dict[int, Dict[int, int]]:
        return {}

    def _compute_causes(self, k: int) -> Dict[int, int]:
        x = self.masks[k]
        below = {i: x for i in self.members(x)}
        for j in self._subs[k]:
            y = self.masks[j]
            for i in self.members(y):
                below[i] &= y
        self._causes[k] = below
        return below

    def brm_mask(self, k: int) -> ActionMultiset:
        return ActionMultiset(self.label_of(i) for i, _ in self.pred[k])


# Public operations on structures

@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_stable(c: ConfigStructure, limit: int = 20) -> ValidationReport:
    rep = ValidationReport()
    if 0 not in c.index:
        rep.violations.append("not rooted: the empty configuration is missing")
    for m in c.masks:
        if m and not any(m & ~(1 << i) in c.index for i in c.members(m)):
            rep.violations.append(f"not connected at {_fmt(c, m)}")
            if len(rep.violations) >= limit:
                return rep
    # Z bounds X u Y iff the union is a subset of Z, so only bounded pairs are checked.
    for z in c.masks:
        subs = [c.masks[j] for j in c._subs[c.index[z]]]
        for x, y in combinations(subs, 2):
            if x | y not in c.index:
                rep.violations.append(f"bounded union {_fmt(c, x)} + {_fmt(c, y)} missing")
            if x & y not in c.index:
                rep.violations.append(f"bounded intersection {_fmt(c, x)} * {_fmt(c, y)} missing")
            if len(rep.violations) >= limit:
                return rep
    return rep


def _fmt(c: ConfigStructure, m: int) -> str:
    return "{" + ", ".join(event_key(c.events[i]) for i in c.members(m)) + "}"


def _config_index(c: ConfigStructure, x) -> int:
    m = x if isinstance(x, int) else c.to_mask(x)
    try:
        return c.index[m]
    except KeyError:
        raise KeyError("not a configuration of this structure") from None


def causality(c: ConfigStructure, x) -> FrozenSet[Tuple[EventId, EventId]]:
    """Pairs ``(e1, e2)`` with ``e1 <=_x e2``, reflexive pairs included."""
    k = _config_index(c, x)
    pairs = set()
    for i, below in c.cause_masks(k).items():
        for j in c.members(below):
            pairs.add((c.events[j], c.events[i]))
    return frozenset(pairs)


def concurrency(c: ConfigStructure, x) -> FrozenSet[FrozenSet[EventId]]:
    k = _config_index(c, x)
    below = c.cause_masks(k)
    out = set()
    for i, j in combinations(sorted(below), 2):
        if not (below[j] >> i & 1) and not (below[i] >> j & 1):
            out.add(frozenset((c.events[i], c.events[j])))
    return frozenset(out)


def _together(c: ConfigStructure) -> List[int]:
    together = [0] * len(c.events)
    for m in c.masks:
        for i in c.members(m):
            together[i] |= m
    return together


def conflicts(c: ConfigStructure) -> FrozenSet[FrozenSet[EventId]]:
    together = _together(c)
    n = len(c.events)
    return frozenset(frozenset((c.events[i], c.events[j]))
                     for i in range(n) for j in range(i + 1, n) if not together[i] >> j & 1)


def scs_transitions(c: ConfigStructure) -> FrozenSet[Tuple[Configuration, str, Configuration]]:
    return frozenset((c.to_set(c.masks[k]), c.label_of(i), c.to_set(c.masks[j]))
                     for k, lst in enumerate(c.succ) for i, j in lst)


def brm_config(c: ConfigStructure, x) -> ActionMultiset:
    return c.brm_mask(_config_index(c, x))


# Operators

def scs_nil() -> ConfigStructure:
    return ConfigStructure((), [()], {})


def scs_prefix(a: str, c: ConfigStructure) -> ConfigStructure:
    root = Base(a)
    wrap = {e: Dot(a, e) for e in c.events}
    labels = {root: a}
    labels.update({wrap[e]: act(wrap[e]) for e in c.labels})
    configs = [()] + [[root] + [wrap[e] for e in x] for x in c.configurations]
    return ConfigStructure([root, *wrap.values()], configs, labels)


def scs_choice(c1: ConfigStructure, c2: ConfigStructure) -> ConfigStructure:
    w1 = {e: PlusL(e) for e in c1.events}
    w2 = {e: PlusR(e) for e in c2.events}
    labels = {w1[e]: act(w1[e]) for e in c1.labels}
    labels.update({w2[e]: act(w2[e]) for e in c2.labels})
    configs = [[w1[e] for e in x] for x in c1.configurations]
    configs += [[w2[e] for e in x] for x in c2.configurations]
    return ConfigStructure([*w1.values(), *w2.values()], configs, labels)


def scs_parallel(c1: ConfigStructure, c2: ConfigStructure, L) -> ConfigStructure:
    """Parallel composition, configurations grown one event at a time from the empty set.

    A candidate set is kept when both projections are configurations, each
    component event is used at most once, and every two events can be told
    apart by some subset whose projections are configurations.
    """
    L = frozenset(L)
    n1 = len(c1.events)
    # component events as bits: c1 events at 0..n1-1, c2 events at n1..
    comp: List[Tuple[EventId, int, int]] = []  # (proof term, mask in c1, mask in c2)
    for i, e in enumerate(c1.events):
        if act(e) not in L:
            comp.append((ParL(L, e), 1 << i, 0))
    for j, e in enumerate(c2.events):
        if act(e) not in L:
            comp.append((ParR(L, e), 0, 1 << j))
    for i, e1 in enumerate(c1.events):
        a = act(e1)
        if a not in L:
            continue
        for j, e2 in enumerate(c2.events):
            if act(e2) == a:
                comp.append((Syn(e1, e2, L), 1 << i, 1 << j))
    labels = {t: act(t) for t, _, _ in comp}

    def valid_subsets_separate(members: List[int], p1: int, p2: int) -> bool:
        # Valid subsets Y of X are fixed by a pair of sub-configurations
        # (Z1, Z2) that agree on every synchronization in X.
        syncs = [(comp[e][1], comp[e][2]) for e in members if comp[e][1] and comp[e][2]]
        sigs = {e: 0 for e in members}
        bit = 0
        for j1 in c1._subs[c1.index[p1]]:
            z1 = c1.masks[j1]
            for j2 in c2._subs[c2.index[p2]]:
                z2 = c2.masks[j2]
                if any(bool(z1 & s1) != bool(z2 & s2) for s1, s2 in syncs):
                    continue
                for e in members:
                    _, m1, m2 = comp[e]
                    if (m1 == 0 or z1 & m1) and (m2 == 0 or z2 & m2):
                        sigs[e] |= 1 << bit
                bit += 1
        return len(set(sigs.values())) == len(sigs)

    start = (frozenset(), 0, 0)
    seen = {frozenset()}
    accepted = [frozenset()]
    queue = deque([start])
    while queue:
        x, p1, p2 = queue.popleft()
        for e, (_, m1, m2) in enumerate(comp):
            if e in x or p1 & m1 or p2 & m2:
                continue  # absent, or would reuse a component event
            y = x | {e}
            if y in seen:
                continue
            q1, q2 = p1 | m1, p2 | m2
            if q1 not in c1.index or q2 not in c2.index:
                continue
            seen.add(y)
            if valid_subsets_separate(sorted(y), q1, q2):
                accepted.append(y)
                queue.append((y, q1, q2))
    events = [t for t, _, _ in comp]
    realized = set().union(*accepted)
    return ConfigStructure([events[e] for e in sorted(realized)],
                           [[events[e] for e in x] for x in accepted], labels)


@dataclass(frozen=True)
class Denotation:
    structure: ConfigStructure
    cursor: Configuration

    @property
    def cursor_index(self) -> int:
        return self.structure.index[self.structure.to_mask(self.cursor)]


@lru_cache(maxsize=4096)
def scs(p: Process) -> ConfigStructure:
    """Structure of an initial process, built operator by operator."""
    if isinstance(p, Nil):
        return scs_nil()
    if isinstance(p, Prefix):
        return scs_prefix(p.action, scs(p.continuation))
    if isinstance(p, Choice):
        return scs_choice(scs(p.left), scs(p.right))
    return scs_parallel(scs(p.left), scs(p.right), p.sync)


def denote(p: Process) -> Denotation:
    if not is_well_formed(p):
        raise ValueError("process is not well formed")
    c = scs(to_initial(p))
    cursor = history_configuration(p)
    if cursor not in c:
        raise ValueError("history is not a configuration: the process is not reachable")
    return Denotation(c, cursor)


# Conflict locality

def event_causes(c: ConfigStructure) -> List[int]:
    """For each event, the events strictly below it in some configuration containing both."""
    causes = [0] * len(c.events)
    for k, m in enumerate(c.masks):
        for i, below in c.cause_masks(k).items():
            causes[i] |= below & ~(1 << i)
    return causes


def conflict_cliques(c: ConfigStructure) -> List[FrozenSet[EventId]]:
    """Maximal sets of pairwise conflicting events, two or more events each."""
    together = _together(c)
    g = nx.Graph()
    n = len(c.events)
    g.add_nodes_from(range(n))
    g.add_edges_from((i, j) for i in range(n) for j in range(i + 1, n)
                     if not together[i] >> j & 1)
    cliques = [sorted(k) for k in nx.find_cliques(g) if len(k) >= 2]
    cliques.sort(key=lambda k: (-len(k), len({c.label_of(i) for i in k}), k))
    return [frozenset(c.events[i] for i in k) for k in cliques]


def nonlocal_cliques(c: ConfigStructure, strict: bool = False) -> List[FrozenSet[EventId]]:
    causes = event_causes(c)
    bad = []
    for clique in conflict_cliques(c):
        bits = [c.bit[e] for e in clique]
        common = ~0
        for i in bits:
            common &= causes[i]
        if common:
            continue
        if not strict and all(causes[i] == 0 for i in bits):
            continue
        bad.append(clique)
    return bad


def is_conflict_local(c: ConfigStructure, strict: bool = False) -> Tuple[bool, Optional[FrozenSet[EventId]]]:
    bad = nonlocal_cliques(c, strict)
    return (not bad, bad[0] if bad else None)


# Files

def load_scs(source) -> Tuple[ConfigStructure, Optional[Configuration]]:
    """Read a structure (and optional cursor) from a path, file object, or parsed dict."""
    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source) as fh:
            data = json.load(fh)
    if not isinstance(data, dict) or "events" not in data or "configurations" not in data:
        raise ValueError("structure file needs 'events' and 'configurations'")
    labels = {}
    for ev in data["events"]:
        eid, lab = str(ev["id"]), str(ev["label"])
        if eid in labels:
            raise ValueError(f"duplicate event id {eid!r}")
        labels[eid] = lab
    configs = []
    seen = set()
    for x in data["configurations"]:
        fx = frozenset(map(str, x))
        if len(fx) != len(x):
            raise ValueError(f"configuration {x} repeats an event")
        if fx in seen:
            raise ValueError(f"duplicate configuration {sorted(fx)}")
        for e in fx:
            if e not in labels:
                raise ValueError(f"dangling event reference {e!r}")
        seen.add(fx)
        configs.append(fx)
    c = ConfigStructure(labels, configs, labels)
    cursor = frozenset(map(str, data["cursor"])) if data.get("cursor") is not None else None
    if cursor is not None and cursor not in c:
        raise ValueError("cursor is not a configuration")
    return c, cursor


def scs_to_json(c: ConfigStructure, cursor: Optional[Iterable[EventId]] = None) -> dict:
    data = {
        "events": [{"id": event_key(e), "label": c.labels[e]} for e in c.events],
        "configurations": [[event_key(c.events[i]) for i in c.members(m)] for m in c.masks],
    }
    if cursor is not None:
        data["cursor"] = sorted(event_key(e) for e in cursor)
    return data


def save_scs(c: ConfigStructure, target, cursor=None):
    data = scs_to_json(c, cursor)
    if hasattr(target, "write"):
        json.dump(data, target, indent=1)
    else:
        with open(target, "w") as fh:
            json.dump(data, fh, indent=1)
