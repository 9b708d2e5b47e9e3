"""Executable correspondence checks between the operational and denotational sides.

Each ``*_failures`` function returns a list of human-readable failure
descriptions; an empty list means the property holds on the given input.
"""
from __future__ import annotations

from collections import Counter
from typing import List, Optional, Sequence, Tuple

from .equivalences import frb_brm_proc, graph_of_lts, graph_of_structure, hhpb
from .logics.checking import eil_model_of_lts, eil_model_of_structure, mc_brm_process
from .logics.closure import EilDomain, brm_closure, disjoint_union
from .logics.enumerate import multisets
from .logics.formulas import Not, format_formula
from .multiset import ActionMultiset
from .semantics import brm_process, cached_lts, history_configuration, path_labels
from .structures import ConfigStructure, event_key, scs, validate_stable
from .syntax import Choice, Parallel, Prefix, Process, actions_of, is_well_formed, print_process, to_initial
from .terms import act, format_term


def cursor_indices(p: Process) -> Tuple[ConfigStructure, List[int]]:
    """The structure of ``p`` and, for every LTS state, the index of its cursor."""
    root = to_initial(p)
    lts, c = cached_lts(root), scs(root)
    out = []
    for s in lts.states:
        m = c.to_mask(history_configuration(s))
        out.append(c.index.get(m, -1))
    return c, out


def transition_bijection_failures(p: Process) -> List[str]:
    """Proved transitions of every reachable state match the structure's transitions at its cursor."""
    root = to_initial(p)
    lts = cached_lts(root)
    c, cur = cursor_indices(root)
    bad = []
    for i, s in enumerate(lts.states):
        k = cur[i]
        if k < 0:
            bad.append(f"state {i}: history is not a configuration")
            continue
        for d, moves, smoves in (("fwd", lts.out[i], c.succ[k]), ("bwd", lts.inc[i], c.pred[k])):
            proc = {t: j for t, j in moves}
            struct = {c.events[e]: j for e, j in smoves}
            if len(proc) != len(moves):
                bad.append(f"state {i}: repeated {d} label")
            if set(proc) != set(struct):
                diff = sorted(format_term(t) for t in set(proc) ^ set(struct))
                bad.append(f"state {i} {d}: labels differ on {diff}")
                continue
            for t, j in proc.items():
                if cur[j] != struct[t]:
                    bad.append(f"state {i} {d} {format_term(t)}: target cursor mismatch")
                if act(t) != c.labels[t]:
                    bad.append(f"state {i} {d} {format_term(t)}: label {act(t)} vs {c.labels[t]}")
    return bad


def brm_consistency_failures(p: Process) -> List[str]:
    root = to_initial(p)
    lts = cached_lts(root)
    c, cur = cursor_indices(root)
    bad = []
    for i, s in enumerate(lts.states):
        syn = brm_process(s)
        inc = ActionMultiset(act(t) for t, _ in lts.inc[i])
        den = c.brm_mask(cur[i]) if cur[i] >= 0 else None
        if not syn == inc == den:
            bad.append(f"state {i} {print_process(s)}: syntactic {syn}, incoming {inc}, structure {den}")
    return bad


def is_sequential(p: Process) -> bool:
    if isinstance(p, Parallel):
        return False
    if isinstance(p, Prefix):
        return is_sequential(p.continuation)
    if isinstance(p, Choice):
        return is_sequential(p.left) and is_sequential(p.right)
    return True


def lts_invariant_failures(p: Process) -> List[str]:
    """Loop property, well-formed reachable states, consistent histories, and tree shape
    for sequential processes."""
    root = to_initial(p)
    lts = cached_lts(root)
    bad = []
    for i, s in enumerate(lts.states):
        if not is_well_formed(s):
            bad.append(f"state {i} not well formed")
        if to_initial(s) != root:
            bad.append(f"state {i} does not roll back to the root")
        if history_configuration(s) != frozenset(path_labels(lts, i)):
            bad.append(f"state {i}: executed events differ from path labels")
        fwd = Counter(t for t, _ in lts.out[i])
        bwd = Counter(t for t, _ in lts.inc[i])
        if any(n > 1 for n in fwd.values()) or any(n > 1 for n in bwd.values()):
            bad.append(f"state {i}: a label leads to two states")
    for i, t, j in lts.edges:
        if (t, i) not in lts.inc[j] or (t, j) not in lts.out[i]:
            bad.append(f"edge {i} -{format_term(t)}-> {j} has no reverse")
    if is_sequential(root):
        if len(lts.edges) != len(lts.states) - 1 or any(len(x) != 1 for x in lts.inc[1:]):
            bad.append("sequential process whose LTS is not a tree")
    return bad


def stability_failures(p: Process) -> List[str]:
    rep = validate_stable(scs(to_initial(p)), limit=3)
    return list(rep.violations)


# Logical correspondences by extension closure

def brm_transfer_failures(p: Process, depth: int = 3, max_mult: int = 2, actions=None) -> List[str]:
    """Every BRM formula up to ``depth`` holds at a process state iff at its cursor."""
    root = to_initial(p)
    lts = cached_lts(root)
    c, cur = cursor_indices(root)
    g, (o1, o2) = disjoint_union(graph_of_lts(lts), graph_of_structure(c))
    acts = sorted(actions_of(root) if actions is None else actions)
    cl = brm_closure(g, acts, multisets(acts, max_mult))
    pairs = [(o1 + i, o2 + k) for i, k in enumerate(cur)]
    hit = cl.separate(pairs, depth)
    if hit is None:
        return []
    f, (u, v) = hit
    return [f"{format_formula(f)} differs at state {u - o1}"]


def eil_transfer_failures(p: Process, depth: int = 3, ids=("x", "y"), all_envs: bool = False) -> List[str]:
    """Every EIL formula up to ``depth`` over ``ids`` holds at a process state iff at its cursor.

    With ``all_envs`` every environment is compared, otherwise only the empty one
    (which settles all closed formulas).
    """
    root = to_initial(p)
    c, cur = cursor_indices(root)
    dom = EilDomain([eil_model_of_lts(root), eil_model_of_structure(c)], ids)
    n = len(cur)
    pairs = []
    for i, k in enumerate(cur):
        if all_envs:
            pairs += [(i * dom.n_env + e, (n + k) * dom.n_env + e) for e in range(dom.n_env)]
        else:
            pairs.append((dom.point(i), dom.point(n + k)))
    hit = dom.closure(actions_of(root)).separate(pairs, depth)
    if hit is None:
        return []
    f, (u, _) = hit
    return [f"{format_formula(f)} differs at point {u}"]


def brm_agreement(p1: Process, p2: Process, depth: int = 3):
    """A BRM formula of depth at most ``depth + 1`` true on ``p1`` and false on ``p2``, or None.

    Atoms range over the brm values that occur, which covers every multiset.
    """
    l1, l2 = cached_lts(to_initial(p1)), cached_lts(to_initial(p2))
    g, (o1, o2) = disjoint_union(graph_of_lts(l1), graph_of_lts(l2))
    acts = sorted(actions_of(p1) | actions_of(p2))
    hit = brm_closure(g, acts).separate([(o1 + l1.state_id(p1), o2 + l2.state_id(p2))], depth)
    if hit is None:
        return None
    # orient the witness so that it holds on p1
    return hit[0] if mc_brm_process(p1, hit[0]) else Not(hit[0])


def eil_agreement(c1: ConfigStructure, c2: ConfigStructure, depth: int = 3, ids=("x", "y")):
    """A closed-equivalent EIL formula of depth at most ``depth`` separating the empty
    configurations of ``c1`` and ``c2``, or None."""
    dom = EilDomain([eil_model_of_structure(c1), eil_model_of_structure(c2)], ids)
    acts = {c1.labels[e] for e in c1.events} | {c2.labels[e] for e in c2.events}
    hit = dom.closure(acts).separate([(dom.point(0), dom.point(len(c1.masks)))], depth)
    return None if hit is None else hit[0]


def diameter(p: Process) -> int:
    """Length of the longest forward path of the LTS of ``p``."""
    lts = cached_lts(to_initial(p))
    longest = [0] * len(lts)
    for i in sorted(range(len(lts)), key=lambda i: -len(history_configuration(lts.states[i]))):
        longest[i] = max((1 + longest[j] for _, j in lts.out[i]), default=0)
    return longest[0]


def characterization_failures(p1: Process, p2: Process, depth: int = 3) -> Tuple[List[str], Optional[int]]:
    """frb-brm verdict against bounded logical agreement.

    Equivalent pairs must agree on every formula up to ``depth``. Inequivalent
    pairs need a certified distinguishing formula, searched by increasing depth
    up to the larger LTS diameter. Returns the failures and, for inequivalent
    pairs, the depth at which a separating formula was found.
    """
    w = frb_brm_proc(p1, p2)
    bad = []
    if w.verdict:
        sep = brm_agreement(p1, p2, depth)
        if sep is not None:
            bad.append(f"equivalent but separated by {format_formula(sep)}")
        return bad, None
    found, sep = None, None
    for k in range(0, max(depth, diameter(p1), diameter(p2)) + 1):
        sep = brm_agreement(p1, p2, k)
        if sep is not None:
            found = k
            break
    if sep is None:
        bad.append("not equivalent but no formula up to the diameter separates")
    for f in (w.formula, sep):
        if f is not None and not (mc_brm_process(p1, f) and not mc_brm_process(p2, f)):
            bad.append(f"claimed witness {format_formula(f)} does not distinguish")
    return bad, found
