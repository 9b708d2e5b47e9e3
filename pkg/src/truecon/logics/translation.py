"""Translation of BRM formulas into EIL formulas driven by a history of identifiers."""
from __future__ import annotations

import itertools
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from ..semantics import cached_lts, history_configuration, lts_and_state
from ..syntax import Process, actions_of, to_initial
from ..terms import ProofTerm, act, format_term
from .checking import mc_brm_process, mc_eil_process
from .formulas import (
    TRUE, And, Atom, Back, Bind, Bwd, Declare, Fwd, Not, Top, atoms_of, conj,
)

History = Tuple[Tuple[str, str], ...]
Environment = Dict[str, ProofTerm]


class TranslationError(ValueError):
    pass


def check_history(h: Sequence[Tuple[str, str]]) -> History:
    h = tuple((str(x), str(a)) for x, a in h)
    ids = [x for x, _ in h]
    if len(set(ids)) != len(ids):
        raise TranslationError("history identifiers must be pairwise distinct")
    return h


def count(a: str, h: History) -> int:
    return sum(1 for _, b in h if b == a)


class _Fresh:
    """Monotone name supply for one translation call."""

    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.n = 0
        self.short_false = False

    def __call__(self, stem: str) -> str:
        while True:
            self.n += 1
            name = f"{stem}{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def translate_brm_to_eil(f, actions, history: Sequence[Tuple[str, str]] = (), short_atoms="error"):
    """Encode BRM formula ``f`` as an EIL formula over action set ``actions``.

    Atoms read their identifiers from ``history``, newest entries last. An atom
    that cannot be encoded (actions outside ``actions``, or more entries needed
    than the history holds) raises, or becomes ``!true`` when ``short_atoms="false"``.
    """
    h = check_history(history)
    A = frozenset(actions)
    fresh = _Fresh(x for x, _ in h)
    fresh.short_false = short_atoms == "false"
    return _translate(f, A, h, fresh)


def _translate(f, A, h: History, fresh: _Fresh):
    if isinstance(f, Top):
        return TRUE
    if isinstance(f, Not):
        return Not(_translate(f.body, A, h, fresh))
    if isinstance(f, And):
        return And(_translate(f.left, A, h, fresh), _translate(f.right, A, h, fresh))
    if isinstance(f, Fwd):
        x = fresh("u")
        return Bind(x, f.action, _translate(f.body, A, h + ((x, f.action),), fresh))
    if isinstance(f, Bwd):
        x = fresh("u")
        return Declare(x, f.action, Back(x, _translate(f.body, A, h, fresh)))
    if isinstance(f, Atom):
        return _atom(f.multiset, A, h, fresh)
    raise TypeError(f"not a BRM formula: {f!r}")


def _atom(m, A, h: History, fresh: _Fresh):
    if not m.support <= A:
        if fresh.short_false:
            return Not(TRUE)
        raise TranslationError(f"atom {m} mentions actions outside {sorted(A)}")
    parts = []
    for a in sorted(m.support):
        ids = [x for x, b in h if b == a]
        need = m[a]
        if len(ids) < need:
            if fresh.short_false:
                return Not(TRUE)
            raise TranslationError(
                f"history has {len(ids)} entries for {a!r}, atom {m} needs {need}")
        top, rest = ids[len(ids) - need:], ids[:len(ids) - need]
        parts += [Back(x, TRUE) for x in reversed(top)]
        parts += [Not(Back(z, TRUE)) for z in reversed(rest)]
    for b in sorted(A - m.support):
        y = fresh("y")
        parts.append(Not(Declare(y, b, Back(y, TRUE))))
    return conj(parts)


# Histories for the existential in the correspondence

def atom_actions(f) -> frozenset:
    out = set()
    for m in atoms_of(f):
        out |= m.support
    return frozenset(out)


def _incoming(p: Process) -> List[ProofTerm]:
    lts, s = lts_and_state(p)
    return [t for t, _ in lts.inc[s]]


def _name(events: Sequence[ProofTerm], incoming) -> Tuple[History, Environment]:
    h, env = [], {}
    for k, e in enumerate(events, 1):
        x = f"{'x' if e in incoming else 'z'}{k}"
        h.append((x, act(e)))
        env[x] = e
    return tuple(h), env


def _path_order(p: Process, keep: frozenset) -> List[ProofTerm]:
    """Events of ``p`` in the order of a shortest proved path, incoming ones moved last."""
    lts, s = lts_and_state(p)
    labels = [t for _, t, _ in lts.path_to(s)]
    inc = set(_incoming(p))
    labels = [t for t in labels if act(t) in keep]
    return [t for t in labels if t not in inc] + [t for t in labels if t in inc]


def _orderings(events: Sequence[ProofTerm], partial: bool):
    sizes = range(len(events) + 1) if partial else [len(events)]
    for k in sizes:
        yield from itertools.permutations(events, k)


def candidate_histories(p: Process, f, limit: int = 50_000,
                        partial: bool = False) -> Iterator[Tuple[History, Environment]]:
    """Histories for ``p`` whose entries name distinct executed events of matching action.

    Only actions occurring in an atom of ``f`` are recorded. By default every
    such event is recorded once (complete histories) in every per-action order,
    starting with the path-derived order; ``partial`` also admits histories
    recording only some of the events. At most ``limit`` histories are produced.
    """
    keep = atom_actions(f)
    incoming = set(_incoming(p))
    first = _path_order(p, keep)
    yield _name(first, incoming)
    groups: Dict[str, List[ProofTerm]] = {}
    for e in sorted(history_configuration(p), key=format_term):
        if act(e) in keep:
            groups.setdefault(act(e), []).append(e)
    seen = {tuple(first)}
    perms = [list(_orderings(groups[a], partial)) for a in sorted(groups)]
    for combo in itertools.islice(itertools.product(*perms), limit):
        order = [e for part in combo for e in part]
        if tuple(order) in seen:
            continue
        seen.add(tuple(order))
        yield _name(order, incoming)


def satisfies_translation(p: Process, f, h: History, env: Environment) -> bool:
    try:
        g = translate_brm_to_eil(f, actions_of(p), h, short_atoms="false")
    except TranslationError:
        return False
    return mc_eil_process(p, env, g)


def history_search(p: Process, f, limit: int = 50_000,
                   partial: bool = False) -> Optional[Tuple[History, Environment]]:
    """First candidate history (with its environment) satisfying the translation of ``f``."""
    for h, env in candidate_histories(p, f, limit, partial):
        if satisfies_translation(p, f, h, env):
            return h, env
    return None


def witness_environment(p: Process, f, limit: int = 50_000) -> Optional[Tuple[History, Environment]]:
    """A history and environment under which ``p`` satisfies the translation of ``f``.

    Complete histories (one entry per recorded event, incoming events last
    first) are tried before partial ones. None when ``p`` does not satisfy
    ``f`` or no candidate works.
    """
    if not mc_brm_process(p, f):
        return None
    return history_search(p, f, limit) or history_search(p, f, limit, partial=True)


def longest_path(p: Process) -> int:
    lts = cached_lts(to_initial(p))
    memo: Dict[int, int] = {}
    for i in sorted(range(len(lts)), key=lambda i: -len(history_configuration(lts.states[i]))):
        memo[i] = max((1 + memo[j] for _, j in lts.out[i]), default=0)
    return memo[0]
