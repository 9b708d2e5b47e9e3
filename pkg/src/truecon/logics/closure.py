"""Exhaustive bounded-depth comparison through formula extensions.

The extension of a formula is the set of model points satisfying it. Every
formula of depth k has an extension built from extensions of depth k-1 by one
grammar step, so closing the set of extensions level by level covers all
formulas up to a depth without listing them. Each distinct extension keeps one
representative formula, which serves as a witness.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from ..equivalences import GameGraph
from .checking import EilModel
from .formulas import TRUE, And, Atom, Back, Bind, Bwd, Declare, Fwd, Not, depth


@dataclass
class _Op:
    """A one-step modality: point ``src[k]`` holds if point ``dst[k]`` is in the body."""
    make: Callable
    src: np.ndarray
    dst: np.ndarray


class ExtensionClosure:
    def __init__(self, size: int, base: Sequence[Tuple[object, np.ndarray]], ops: Sequence[_Op]):
        self.size = size
        self.base = list(base)
        self.ops = list(ops)

    def _apply(self, op: _Op, s: np.ndarray) -> np.ndarray:
        if not len(op.src):
            return np.zeros(self.size, dtype=bool)
        hit = op.src[s[op.dst]]
        out = np.zeros(self.size, dtype=bool)
        out[hit] = True
        return out

    def separate(self, pairs: Sequence[Tuple[int, int]], max_depth: int):
        """A formula of depth at most ``max_depth`` true at exactly one point of some pair, or None.

        Returns (formula, (u, v)) for the first separating formula found, by increasing depth.
        """
        if not pairs:
            return None
        U = np.array([u for u, _ in pairs])
        V = np.array([v for _, v in pairs])

        def split(s):
            diff = np.nonzero(s[U] != s[V])[0]
            return (int(U[diff[0]]), int(V[diff[0]])) if len(diff) else None

        seen: Dict[bytes, object] = {}
        new: List[Tuple[object, np.ndarray]] = []
        for f, s in self.base:
            key = s.tobytes()
            if key not in seen:
                seen[key] = f
                new.append((f, s))
                hit = split(s)
                if hit:
                    return f, hit
        everything = list(new)
        for k in range(1, max_depth + 1):
            last = k == max_depth
            level = []

            def offer(f, s):
                key = s.tobytes()
                if key in seen:
                    return None
                seen[key] = f
                level.append((f, s))
                return split(s)

            # negation and conjunction separate only what their parts already separate
            if not last:
                for f, s in new:
                    hit = offer(Not(f), ~s)
                    if hit:
                        return Not(f), hit
                for f, s in new:
                    for g, t in everything:
                        hit = offer(And(f, g), s & t)
                        if hit:
                            return And(f, g), hit
            for f, s in new:
                for op in self.ops:
                    g = op.make(f)
                    r = self._apply(op, s)
                    if last:
                        hit = split(r)
                    else:
                        hit = offer(g, r)
                    if hit:
                        return g, hit
            new = level
            everything += level
        return None

    def extensions(self, max_depth: int) -> Dict[bytes, object]:
        """All distinct extensions up to ``max_depth`` with a representative formula each."""
        seen: Dict[bytes, object] = {}
        new = []
        for f, s in self.base:
            if s.tobytes() not in seen:
                seen[s.tobytes()] = f
                new.append((f, s))
        everything = list(new)
        for _ in range(max_depth):
            level = []

            def offer(f, s):
                if s.tobytes() not in seen:
                    seen[s.tobytes()] = f
                    level.append((f, s))

            for f, s in new:
                offer(Not(f), ~s)
                for g, t in everything:
                    offer(And(f, g), s & t)
                for op in self.ops:
                    offer(op.make(f), self._apply(op, s))
            new = level
            everything += level
        return seen


# BRM over game graphs

def disjoint_union(*graphs: GameGraph) -> Tuple[GameGraph, List[int]]:
    out, inc, brm, offsets = [], [], [], []
    for g in graphs:
        base = len(brm)
        offsets.append(base)
        out += [[(a, t + base) for a, t in lst] for lst in g.out]
        inc += [[(a, t + base) for a, t in lst] for lst in g.inc]
        brm += list(g.brm)
    return GameGraph(out, inc, brm), offsets


def brm_closure(g: GameGraph, actions, atoms=None) -> ExtensionClosure:
    """Closure engine for BRM over ``g``.

    ``atoms=None`` uses the multisets that occur as brm values in ``g``; every
    other atom has the same (empty) extension as ``!true``, so this covers all atoms.
    """
    n = len(g.brm)
    full = np.ones(n, dtype=bool)
    base = [(TRUE, full)]
    if atoms is None:
        atoms = sorted(set(g.brm), key=lambda m: (m.size(), str(m)))
    for m in atoms:
        base.append((Atom(m), np.array([b == m for b in g.brm], dtype=bool)))
    ops = []
    for a in sorted(set(actions)):
        for edges, ctor in ((g.out, Fwd), (g.inc, Bwd)):
            pairs = [(s, t) for s in range(n) for b, t in edges[s] if b == a]
            src = np.array([s for s, _ in pairs], dtype=np.int64)
            dst = np.array([t for _, t in pairs], dtype=np.int64)
            ops.append(_Op(lambda f, a=a, ctor=ctor: ctor(a, f), src, dst))
    return ExtensionClosure(n, base, ops)


# EIL over event-identifier models

class EilDomain:
    """Points are (state, environment) with environments over ``ids`` mapping to
    events or unbound. States of several models may be stacked side by side."""

    def __init__(self, models: Sequence[EilModel], ids: Sequence[str]):
        self.models = list(models)
        self.ids = tuple(ids)
        events: Dict[Hashable, int] = {}
        for m in models:
            for lst in m.done:
                for e, _ in lst:
                    events.setdefault(e, len(events) + 1)
            for lst in m.out:
                for e, _, _ in lst:
                    events.setdefault(e, len(events) + 1)
        self.events = events
        self.base = len(events) + 1
        self.n_env = self.base ** len(self.ids)
        self.offsets = []
        total = 0
        for m in models:
            self.offsets.append(total)
            total += len(m.out)
        self.n_states = total
        self.size = total * self.n_env
        envs = np.arange(self.n_env)
        self.codes = [(envs // self.base ** i) % self.base for i in range(len(self.ids))]

    def point(self, state: int, env: Optional[dict] = None) -> int:
        code = 0
        for i, x in enumerate(self.ids):
            if env and x in env:
                code += self.events[env[x]] * self.base ** i
        return state * self.n_env + code

    def _set(self, i: int, envs: np.ndarray, e: int) -> np.ndarray:
        w = self.base ** i
        return envs - self.codes[i][envs] * w + e * w

    def closure(self, actions) -> ExtensionClosure:
        ops = []
        envs = np.arange(self.n_env)
        for i, x in enumerate(self.ids):
            for a in sorted(set(actions)):
                for kind in (Bind, Declare):
                    src, dst = [], []
                    for m, off in zip(self.models, self.offsets):
                        for s in range(len(m.out)):
                            if kind is Bind:
                                moves = [(e, t) for e, b, t in m.out[s] if b == a]
                            else:
                                moves = [(e, s) for e, b in m.done[s] if b == a]
                            for e, t in moves:
                                src.append((s + off) * self.n_env + envs)
                                dst.append((t + off) * self.n_env + self._set(i, envs, self.events[e]))
                    ops.append(_Op(lambda f, x=x, a=a, kind=kind: kind(x, a, f), _cat(src), _cat(dst)))
            src, dst = [], []
            for m, off in zip(self.models, self.offsets):
                for s in range(len(m.inc)):
                    for e, t in m.inc[s]:
                        hit = envs[self.codes[i] == self.events[e]]
                        src.append((s + off) * self.n_env + hit)
                        dst.append((t + off) * self.n_env + hit)
            ops.append(_Op(lambda f, x=x: Back(x, f), _cat(src), _cat(dst)))
        return ExtensionClosure(self.size, [(TRUE, np.ones(self.size, dtype=bool))], ops)


def _cat(parts) -> np.ndarray:
    return np.concatenate(parts).astype(np.int64) if parts else np.zeros(0, dtype=np.int64)
