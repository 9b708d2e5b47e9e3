"""Bisimilarity checkers: HHPB on structures, FRB:brm on structures and on processes."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .logics.formulas import TRUE, And, Atom, Bwd, Fwd, Not, conj
from .multiset import ActionMultiset
from .semantics import ProvedLTS, brm_process, build_lts
from .structures import ConfigStructure, validate_stable
from .syntax import Process, is_well_formed, to_initial
from .terms import act


@dataclass
class GameGraph:
    """A state space seen through actions only: what the FRB:brm game observes."""
    out: List[List[Tuple[str, int]]]
    inc: List[List[Tuple[str, int]]]
    brm: List[ActionMultiset]

    def __len__(self) -> int:
        return len(self.out)

    def moves(self, s: int, direction: str) -> List[Tuple[str, int]]:
        return self.out[s] if direction == "fwd" else self.inc[s]


def graph_of_structure(c: ConfigStructure) -> GameGraph:
    out = [[(c.label_of(i), j) for i, j in lst] for lst in c.succ]
    inc = [[(c.label_of(i), j) for i, j in lst] for lst in c.pred]
    return GameGraph(out, inc, [c.brm_mask(k) for k in range(len(c.masks))])


def graph_of_lts(lts: ProvedLTS) -> GameGraph:
    out = [[(act(t), j) for t, j in lst] for lst in lts.out]
    inc = [[(act(t), j) for t, j in lst] for lst in lts.inc]
    return GameGraph(out, inc, [brm_process(s) for s in lts.states])


@dataclass
class EquivalenceWitness:
    verdict: bool
    relation: frozenset
    trace: Optional[List[Tuple[str, str]]] = None
    formula: object = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.verdict

    def to_json(self) -> dict:
        from .logics.formulas import format_formula
        data = {
            "verdict": self.verdict,
            "relationSize": len(self.relation),
            "trace": [{"dir": d, "action": a} for d, a in (self.trace or [])],
        }
        if self.formula is not None:
            data["formula"] = format_formula(self.formula)
        data.update(self.details)
        return data


# FRB:brm

_DIRS = ("fwd", "bwd")


@dataclass
class FrbGame:
    """Greatest fixpoint of the brm-forward-reverse transfer clauses, computed in rounds.

    ``rank[p]`` is the round in which pair ``p`` was removed: 0 for unequal
    brm, ``r`` when some move of one side could only be answered by pairs
    already removed before round ``r``. Surviving pairs have no rank.
    """
    g1: GameGraph
    g2: GameGraph
    start: Tuple[int, int]
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    rank: Dict[Tuple[int, int], int] = field(default_factory=dict)
    kill: Dict[Tuple[int, int], tuple] = field(default_factory=dict)

    def solve(self) -> "FrbGame":
        g1, g2 = self.g1, self.g2
        seen = {self.start}
        order = [self.start]
        k = 0
        while k < len(order):
            s1, s2 = order[k]
            k += 1
            for d in _DIRS:
                for a, t1 in g1.moves(s1, d):
                    for b, t2 in g2.moves(s2, d):
                        if a == b and (t1, t2) not in seen:
                            seen.add((t1, t2))
                            order.append((t1, t2))
        self.pairs = order
        alive = set()
        for p in order:
            if g1.brm[p[0]] != g2.brm[p[1]]:
                self.rank[p] = 0
                self.kill[p] = ("brm",)
            else:
                alive.add(p)
        r = 0
        while True:
            r += 1
            dead = {}
            for p in alive:
                why = self._attack(p, alive)
                if why is not None:
                    dead[p] = why
            if not dead:
                break
            for p, why in dead.items():
                alive.discard(p)
                self.rank[p] = r
                self.kill[p] = why
        self.alive = frozenset(alive)
        return self

    def _attack(self, p, alive):
        s1, s2 = p
        for d in _DIRS:
            for a, t1 in self.g1.moves(s1, d):
                if not any(b == a and (t1, t2) in alive for b, t2 in self.g2.moves(s2, d)):
                    return (1, d, a, t1)
            for a, t2 in self.g2.moves(s2, d):
                if not any(b == a and (t1, t2) in alive for b, t1 in self.g1.moves(s1, d)):
                    return (2, d, a, t2)
        return None

    @property
    def verdict(self) -> bool:
        return self.start in self.alive

    def responses(self, p, why):
        side, d, a, t = why
        s1, s2 = p
        if side == 1:
            return [(t, t2) for b, t2 in self.g2.moves(s2, d) if b == a]
        return [(t1, t) for b, t1 in self.g1.moves(s1, d) if b == a]

    def distinguishing_formula(self, p=None):
        """A BRM formula true on the first component of ``p`` and false on the second."""
        p = self.start if p is None else p
        if p not in self.rank:
            return None
        memo: Dict[Tuple[int, int], object] = {}

        def dist(q):
            if q in memo:
                return memo[q]
            why = self.kill[q]
            if why[0] == "brm":
                f = Atom(self.g1.brm[q[0]])
            else:
                side, d, a, _ = why
                parts = []
                for resp in sorted(set(self.responses(q, why))):
                    sub = dist(resp)
                    parts.append(sub if side == 1 else _negate(sub))
                parts = list(dict.fromkeys(parts))
                body = conj(parts)
                f = Fwd(a, body) if d == "fwd" else Bwd(a, body)
                if side == 2:
                    f = _negate(f)
            memo[q] = f
            return f

        return dist(p)

    def trace(self, p=None) -> List[Tuple[str, str]]:
        """Attacker moves replayed greedily along the earliest-removed answers."""
        return self.play(p)[0]

    def play(self, p=None) -> Tuple[List[Tuple[str, str]], Tuple[int, int]]:
        """The greedy attacker trace together with the pair it ends in."""
        p = self.start if p is None else p
        steps: List[Tuple[str, str]] = []
        while p in self.rank:
            why = self.kill[p]
            if why[0] == "brm":
                break
            side, d, a, _ = why
            steps.append((d, a))
            resp = self.responses(p, why)
            if not resp:
                break
            p = min(resp, key=lambda q: (self.rank[q], q))
        return steps, p


def _negate(f):
    return f.body if isinstance(f, Not) else Not(f)


def _frb_witness(game: FrbGame) -> EquivalenceWitness:
    if game.verdict:
        return EquivalenceWitness(True, game.alive)
    steps, end = game.play()
    details = {"rounds": game.rank[game.start]}
    if game.kill[end][0] == "brm":
        details["brm"] = [str(game.g1.brm[end[0]]), str(game.g2.brm[end[1]])]
    return EquivalenceWitness(False, game.alive, steps, game.distinguishing_formula(), details)


def _require_stable(*cs: ConfigStructure):
    for c in cs:
        rep = validate_stable(c, limit=1)
        if not rep.ok:
            raise ValueError(f"structure is not stable: {rep.violations[0]}")


def frb_brm_scs(c1: ConfigStructure, c2: ConfigStructure, x1=0, x2=0, check=True) -> EquivalenceWitness:
    """brm-forward-reverse bisimilarity of two structures, from configurations ``x1``/``x2``."""
    if check:
        _require_stable(c1, c2)
    k1 = c1.index[x1 if isinstance(x1, int) else c1.to_mask(x1)]
    k2 = c2.index[x2 if isinstance(x2, int) else c2.to_mask(x2)]
    return _frb_witness(FrbGame(graph_of_structure(c1), graph_of_structure(c2), (k1, k2)).solve())


def proc_game(p1: Process, p2: Process) -> Tuple[FrbGame, ProvedLTS, ProvedLTS]:
    for p in (p1, p2):
        if not is_well_formed(p):
            raise ValueError("process is not well formed")
    l1, l2 = build_lts(to_initial(p1)), build_lts(to_initial(p2))
    game = FrbGame(graph_of_lts(l1), graph_of_lts(l2), (l1.state_id(p1), l2.state_id(p2)))
    return game.solve(), l1, l2


def frb_brm_proc(p1: Process, p2: Process) -> EquivalenceWitness:
    return _frb_witness(proc_game(p1, p2)[0])


# HHPB

Triple = Tuple[int, int, FrozenSet[Tuple[int, int]]]


class _Hhpb:
    def __init__(self, c1: ConfigStructure, c2: ConfigStructure):
        self.c1, self.c2 = c1, c2

    def preserves_causality(self, k1: int, k2: int, f: FrozenSet[Tuple[int, int]]) -> bool:
        fmap = dict(f)
        below1 = self.c1.cause_masks(k1)
        below2 = self.c2.cause_masks(k2)
        for e1, e2 in fmap.items():
            image = 0
            for b in self.c1.members(below1[e1]):
                image |= 1 << fmap[b]
            if image != below2[e2]:
                return False
        return True

    def solve(self):
        c1, c2 = self.c1, self.c2
        start: Triple = (0, 0, frozenset())
        fwd: Dict[Triple, list] = {}
        bwd: Dict[Triple, list] = {}
        order = [start]
        seen = {start}
        i = 0
        while i < len(order):
            t = order[i]
            i += 1
            k1, k2, f = t
            fmap = dict(f)
            inv = {b: a for a, b in f}
            # forward moves: (side, event, label, candidate triples)
            moves = []
            ext: Dict[Tuple[int, int], Triple] = {}
            for e1, j1 in c1.succ[k1]:
                for e2, j2 in c2.succ[k2]:
                    if c1.label_of(e1) == c2.label_of(e2):
                        nf = f | {(e1, e2)}
                        if self.preserves_causality(j1, j2, nf):
                            ext[(e1, e2)] = (j1, j2, nf)
            for e1, _ in c1.succ[k1]:
                moves.append((1, e1, c1.label_of(e1),
                              [ext[(e1, e2)] for e2, _ in c2.succ[k2] if (e1, e2) in ext]))
            for e2, _ in c2.succ[k2]:
                moves.append((2, e2, c2.label_of(e2),
                              [ext[(e1, e2)] for e1, _ in c1.succ[k1] if (e1, e2) in ext]))
            fwd[t] = moves
            # backward moves: the bijection fixes the answer
            back = []
            pred2 = {e: j for e, j in c2.pred[k2]}
            pred1 = {e: j for e, j in c1.pred[k1]}
            for e1, j1 in c1.pred[k1]:
                e2 = fmap[e1]
                cands = []
                if e2 in pred2:
                    nt = (j1, pred2[e2], f - {(e1, e2)})
                    if self.preserves_causality(nt[0], nt[1], nt[2]):
                        cands.append(nt)
                back.append((1, e1, c1.label_of(e1), cands))
            for e2, j2 in c2.pred[k2]:
                e1 = inv[e2]
                cands = []
                if e1 in pred1:
                    nt = (pred1[e1], j2, f - {(e1, e2)})
                    if self.preserves_causality(nt[0], nt[1], nt[2]):
                        cands.append(nt)
                back.append((2, e2, c2.label_of(e2), cands))
            bwd[t] = back
            for lst in (moves, back):
                for _, _, _, cands in lst:
                    for nt in cands:
                        if nt not in seen:
                            seen.add(nt)
                            order.append(nt)
        self.triples = order
        self.moves = {t: [("fwd",) + m for m in fwd[t]] + [("bwd",) + m for m in bwd[t]]
                      for t in order}
        alive = set(order)
        self.rank: Dict[Triple, int] = {}
        self.kill: Dict[Triple, tuple] = {}
        r = 0
        while True:
            r += 1
            dead = {}
            for t in alive:
                for mv in self.moves[t]:
                    if not any(nt in alive for nt in mv[4]):
                        dead[t] = mv
                        break
            if not dead:
                break
            for t, mv in dead.items():
                alive.discard(t)
                self.rank[t] = r
                self.kill[t] = mv
        self.alive = frozenset(alive)
        self.start = start
        return self

    def trace(self) -> List[Tuple[str, str]]:
        t = self.start
        steps = []
        while t in self.rank:
            d, side, e, label, cands = self.kill[t]
            steps.append((d, label))
            if not cands:
                break
            t = min(cands, key=lambda q: (self.rank[q], q[0], q[1], sorted(q[2])))
        return steps


def hhpb(c1: ConfigStructure, c2: ConfigStructure, check=True) -> EquivalenceWitness:
    """Hereditary history-preserving bisimilarity via a greatest fixpoint over reachable triples."""
    if check:
        _require_stable(c1, c2)
    game = _Hhpb(c1, c2).solve()
    verdict = game.start in game.alive
    relation = frozenset((c1.masks[k1], c2.masks[k2], f) for k1, k2, f in game.alive)
    if verdict:
        return EquivalenceWitness(True, relation, details={"triples": len(game.triples)})
    return EquivalenceWitness(False, relation, game.trace(),
                              details={"triples": len(game.triples), "rounds": game.rank[game.start]})


def replay_trace(g1: GameGraph, g2: GameGraph, start: Tuple[int, int], trace) -> bool:
    """Check that a trace is playable by at least one side from the start pair.

    Each step is a direction and an action; the set of states each side can
    be in is tracked. A trace is a valid witness when it can be followed on
    one side from the start.
    """
    def follow(g, s):
        cur = {s}
        for d, a in trace:
            cur = {t for x in cur for b, t in g.moves(x, d) if b == a}
            if not cur:
                return False
        return True

    return follow(g1, start[0]) or follow(g2, start[1])
