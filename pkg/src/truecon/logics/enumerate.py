"""Bounded, deterministic enumeration of BRM and EIL formulas."""
from __future__ import annotations

import itertools
from typing import Iterator, List, Sequence

from ..multiset import ActionMultiset
from .formulas import TRUE, And, Atom, Back, Bind, Bwd, Declare, Fwd, Not, fid

IDENTIFIERS = ("x", "y", "z", "w")


def multisets(actions: Sequence[str], max_mult: int) -> List[ActionMultiset]:
    """Every multiset over ``actions`` with multiplicities at most ``max_mult``, empty first."""
    acts = sorted(set(actions))
    out = []
    for counts in itertools.product(range(max_mult + 1), repeat=len(acts)):
        out.append(ActionMultiset(dict(zip(acts, counts))))
    out.sort(key=lambda m: (m.size(), str(m)))
    return out


def _levels(base: list, unary, max_depth: int) -> Iterator[tuple]:
    """Yield (depth, formula) by exact depth; ``unary(f)`` lists the one-step wrappers of ``f``."""
    by_depth = [list(base)]
    yield from ((0, f) for f in base)
    upto = list(base)
    for k in range(1, max_depth + 1):
        prev, older = by_depth[-1], upto[:len(upto) - len(by_depth[-1])]
        level = []
        level += [Not(f) for f in prev]
        # conjunctions whose deeper side has depth exactly k-1
        level += [And(l, r) for l in prev for r in upto]
        level += [And(l, r) for l in older for r in prev]
        for f in prev:
            level += unary(f)
        by_depth.append(level)
        upto = upto + level
        yield from ((k, f) for f in level)


def enumerate_brm_formulas(actions, max_depth: int, max_mult: int = 1) -> Iterator:
    acts = sorted(set(actions))
    base = [TRUE] + [Atom(m) for m in multisets(acts, max_mult)]

    def unary(f):
        return [Fwd(a, f) for a in acts] + [Bwd(a, f) for a in acts]

    for _, f in _levels(base, unary, max_depth):
        yield f


def enumerate_eil_formulas(actions, max_depth: int, max_ids: int = 2, closed: bool = True) -> Iterator:
    acts = sorted(set(actions))
    ids = IDENTIFIERS[:max_ids]

    def unary(f):
        out = [Bind(x, a, f) for x in ids for a in acts]
        out += [Declare(x, a, f) for x in ids for a in acts]
        out += [Back(x, f) for x in ids]
        return out

    for _, f in _levels([TRUE], unary, max_depth):
        if not closed or not fid(f):
            yield f


def brm_formula_count(n_actions: int, max_depth: int, max_mult: int = 1) -> int:
    """Number of BRM formulas of depth at most ``max_depth``, by the grammar recurrence."""
    exact = [1 + (max_mult + 1) ** n_actions]
    upto = [exact[0]]
    for k in range(1, max_depth + 1):
        below = upto[k - 2] if k >= 2 else 0
        exact.append((1 + 2 * n_actions) * exact[k - 1] + upto[k - 1] ** 2 - below ** 2)
        upto.append(upto[k - 1] + exact[k])
    return upto[max_depth]


def eil_formula_count(n_actions: int, max_depth: int, max_ids: int = 2) -> int:
    """Number of EIL formulas (open or closed) of depth at most ``max_depth``."""
    exact, upto = [1], [1]
    wrap = 1 + max_ids * (2 * n_actions + 1)
    for k in range(1, max_depth + 1):
        below = upto[k - 2] if k >= 2 else 0
        exact.append(wrap * exact[k - 1] + upto[k - 1] ** 2 - below ** 2)
        upto.append(upto[k - 1] + exact[k])
    return upto[max_depth]


def random_brm_formula(rng, actions, max_depth: int, max_mult: int = 2):
    """A random BRM formula of depth at most ``max_depth``; ``rng`` is a ``random.Random``."""
    acts = sorted(set(actions))
    if max_depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.15:
            return TRUE
        return Atom(ActionMultiset({a: rng.randint(0, max_mult) for a in acts}))
    r = rng.random()
    if r < 0.2:
        return Not(random_brm_formula(rng, acts, max_depth - 1, max_mult))
    if r < 0.4:
        return And(random_brm_formula(rng, acts, max_depth - 1, max_mult),
                   random_brm_formula(rng, acts, max_depth - 1, max_mult))
    body = random_brm_formula(rng, acts, max_depth - 1, max_mult)
    return (Fwd if r < 0.7 else Bwd)(rng.choice(acts), body)
