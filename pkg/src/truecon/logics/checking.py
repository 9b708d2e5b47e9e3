"""Model checking for BRM and EIL formulas over processes and configuration structures."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Tuple

from ..equivalences import GameGraph, graph_of_lts, graph_of_structure
from ..semantics import apt, cached_lts, lts_and_state
from ..structures import ConfigStructure, Denotation
from ..syntax import Process, executed_occurrences
from ..terms import act
from .formulas import And, Atom, Back, Bind, Bwd, Declare, Fwd, Not, Top, fid


class NotPermissible(ValueError):
    """Raised when an environment does not cover the free identifiers of a formula."""


# BRM

def mc_brm_graph(g: GameGraph, s: int, f) -> bool:
    memo: Dict[Tuple[int, object], bool] = {}

    def ev(s: int, f) -> bool:
        key = (s, f)
        if key in memo:
            return memo[key]
        if isinstance(f, Top):
            r = True
        elif isinstance(f, Atom):
            r = g.brm[s] == f.multiset
        elif isinstance(f, Not):
            r = not ev(s, f.body)
        elif isinstance(f, And):
            r = ev(s, f.left) and ev(s, f.right)
        elif isinstance(f, Fwd):
            r = any(a == f.action and ev(t, f.body) for a, t in g.out[s])
        elif isinstance(f, Bwd):
            r = any(a == f.action and ev(t, f.body) for a, t in g.inc[s])
        else:
            raise TypeError(f"not a BRM formula: {f!r}")
        memo[key] = r
        return r

    return ev(s, f)


@lru_cache(maxsize=512)
def _lts_graph(root: Process) -> GameGraph:
    return graph_of_lts(cached_lts(root))


def mc_brm_process(p: Process, f) -> bool:
    lts, s = lts_and_state(p)
    return mc_brm_graph(_lts_graph(lts.root), s, f)


def mc_brm_scs(d: Denotation, f) -> bool:
    c = d.structure
    return mc_brm_graph(graph_of_structure(c), d.cursor_index, f)


# EIL

@dataclass
class EilModel:
    """What EIL observes of a state space.

    ``out[s]``: (event, action, target); ``inc[s]``: (event, source);
    ``done[s]``: (event, action) for the events already executed in ``s``.
    """
    out: List[List[Tuple[Hashable, str, int]]]
    inc: List[List[Tuple[Hashable, int]]]
    done: List[List[Tuple[Hashable, str]]]


def eil_model_of_structure(c: ConfigStructure) -> EilModel:
    out = [[(c.events[i], c.label_of(i), j) for i, j in lst] for lst in c.succ]
    inc = [[(c.events[i], j) for i, j in lst] for lst in c.pred]
    done = [[(c.events[i], c.label_of(i)) for i in c.members(m)] for m in c.masks]
    return EilModel(out, inc, done)


@lru_cache(maxsize=512)
def eil_model_of_lts(root: Process) -> EilModel:
    lts = cached_lts(root)
    out = [[(t, act(t), j) for t, j in lst] for lst in lts.out]
    inc = [[(t, i) for t, i in lst] for lst in lts.inc]
    done = []
    for s in lts.states:
        # the process reading of (x:a): executed a-prefixes, named by apt
        done.append([(apt(occ, s), pre.action) for occ, pre in executed_occurrences(s)])
    return EilModel(out, inc, done)


def _env_key(env: Mapping[str, Hashable], f) -> frozenset:
    free = fid(f)
    return frozenset((x, e) for x, e in env.items() if x in free)


def eval_eil(m: EilModel, s: int, env: Mapping[str, Hashable], f) -> bool:
    """Evaluate literally: undoing ``x`` fails when ``env[x]`` is not an incoming event."""
    memo: Dict[tuple, bool] = {}

    def ev(s: int, env: Dict[str, Hashable], f) -> bool:
        key = (s, _env_key(env, f), f)
        if key in memo:
            return memo[key]
        if isinstance(f, Top):
            r = True
        elif isinstance(f, Not):
            r = not ev(s, env, f.body)
        elif isinstance(f, And):
            r = ev(s, env, f.left) and ev(s, env, f.right)
        elif isinstance(f, Bind):
            r = any(a == f.action and ev(t, {**env, f.ident: e}, f.body) for e, a, t in m.out[s])
        elif isinstance(f, Declare):
            r = any(a == f.action and ev(s, {**env, f.ident: e}, f.body) for e, a in m.done[s])
        elif isinstance(f, Back):
            r = f.ident in env and any(e == env[f.ident] and ev(t, env, f.body)
                                       for e, t in m.inc[s])
        else:
            raise TypeError(f"not an EIL formula: {f!r}")
        memo[key] = r
        return r

    return ev(s, dict(env), f)


def check_permissible(executed, env: Mapping[str, Hashable], f):
    free = fid(f)
    missing = free - set(env)
    if missing:
        raise NotPermissible(f"no binding for {sorted(missing)}")
    done = set(executed)
    outside = [x for x in free if env[x] not in done]
    if outside:
        raise NotPermissible(f"identifiers {sorted(outside)} are bound to events not yet executed")


def mc_eil_scs(c: ConfigStructure, x, env: Mapping[str, Hashable], f) -> bool:
    k = c.index[x if isinstance(x, int) else c.to_mask(x)]
    check_permissible(c.to_set(c.masks[k]), env, f)
    return eval_eil(eil_model_of_structure(c), k, env, f)


def mc_eil_process(p: Process, env: Mapping[str, Hashable], f) -> bool:
    lts, s = lts_and_state(p)
    m = eil_model_of_lts(lts.root)
    check_permissible([e for e, _ in m.done[s]], env, f)
    return eval_eil(m, s, env, f)
