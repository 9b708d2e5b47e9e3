"""Seeded process generator and the hhpb / frb-brm cross-validation harness."""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .equivalences import frb_brm_proc, hhpb
from .structures import is_conflict_local, scs
from .syntax import NIL, Choice, Nil, Parallel, Prefix, Process, print_process

ACTION_NAMES = "abcdefgh"


class GeneratorExhausted(RuntimeError):
    """The rejection budget ran out before enough candidates passed the filter."""


@dataclass
class GeneratorConfig:
    seed: int = 0
    count: int = 10
    max_prefix_depth: int = 3
    max_parallel_width: int = 3
    max_actions: int = 3
    local_only: bool = False
    budget_factor: int = 200

    def __post_init__(self):
        for name in ("count", "max_prefix_depth", "max_parallel_width", "max_actions"):
            if getattr(self, name) < 1 and not (name == "count" and self.count == 0):
                raise ValueError(f"{name} must be positive")
        if self.max_actions > len(ACTION_NAMES):
            raise ValueError(f"at most {len(ACTION_NAMES)} actions")


class _Gen:
    def __init__(self, cfg: GeneratorConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.actions = ACTION_NAMES[:cfg.max_actions]

    def action(self) -> str:
        return self.rng.choice(self.actions)

    def sync(self) -> frozenset:
        r = self.rng.random()
        if r < 0.5:
            return frozenset()
        k = 1 if r < 0.9 else 2
        return frozenset(self.rng.sample(self.actions, min(k, len(self.actions))))

    def process(self) -> Process:
        width = self.rng.randint(1, self.cfg.max_parallel_width)
        return self.term(self.cfg.max_prefix_depth, width)

    def term(self, depth: int, comps: int) -> Process:
        if comps > 1 and self.rng.random() < 0.6:
            k = self.rng.randint(1, comps - 1)
            return Parallel(self.term(depth, k), self.term(depth, comps - k), self.sync())
        return self.seq(depth, comps)

    def seq(self, depth: int, comps: int) -> Process:
        if depth == 0:
            return NIL
        if depth >= 2 and self.rng.random() < 0.25:
            return Choice(self.prefix(depth, comps), self.prefix(depth, 1))
        return self.prefix(depth, comps)

    def prefix(self, depth: int, comps: int) -> Process:
        a = self.action()
        if depth == 1 or self.rng.random() < 0.25:
            return Prefix(a, False, None, NIL)
        return Prefix(a, False, None, self.term(depth - 1, comps))


def _is_local(p: Process) -> bool:
    return is_conflict_local(scs(p))[0]


def generate_processes(cfg: GeneratorConfig) -> List[Process]:
    """``cfg.count`` initial processes; with ``local_only`` each denotation is conflict-local."""
    rng = random.Random(cfg.seed)
    gen = _Gen(cfg, rng)
    out: List[Process] = []
    attempts = 0
    while len(out) < cfg.count:
        attempts += 1
        if attempts > cfg.budget_factor * max(cfg.count, 1):
            raise GeneratorExhausted(f"only {len(out)} of {cfg.count} candidates after {attempts - 1} attempts")
        p = gen.process()
        if cfg.local_only and not _is_local(p):
            continue
        out.append(p)
    return out


# Pairs

def _nodes(p: Process, path=()):
    yield path, p
    if isinstance(p, Prefix):
        yield from _nodes(p.continuation, path + (0,))
    elif isinstance(p, (Choice, Parallel)):
        yield from _nodes(p.left, path + (0,))
        yield from _nodes(p.right, path + (1,))


def _replace(p: Process, path, new: Process) -> Process:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(p, Prefix):
        return Prefix(p.action, p.executed, p.decoration, _replace(p.continuation, rest, new))
    if isinstance(p, Choice):
        return Choice(_replace(p.left, rest, new), p.right) if head == 0 else Choice(p.left, _replace(p.right, rest, new))
    return (Parallel(_replace(p.left, rest, new), p.right, p.sync) if head == 0
            else Parallel(p.left, _replace(p.right, rest, new), p.sync))


def _variant(p: Process, gen: _Gen) -> Process:
    """A rewrite of ``p`` that is often, but not always, equivalent to it."""
    rng = gen.rng
    nodes = [(path, q) for path, q in _nodes(p) if not isinstance(q, Nil)]
    path, q = rng.choice(nodes)
    r = rng.random()
    if isinstance(q, (Choice, Parallel)) and r < 0.4:
        swapped = Choice(q.right, q.left) if isinstance(q, Choice) else Parallel(q.right, q.left, q.sync)
        return _replace(p, path, swapped)
    if r < 0.6:
        return _replace(p, path, Choice(q, q))
    if isinstance(q, Prefix) and r < 0.8:
        return _replace(p, path, Prefix(gen.action(), False, None, q.continuation))
    if isinstance(q, Parallel) and r < 0.9:
        first = q.left
        # sequentialize: put the right operand after the left's leaves
        return _replace(p, path, _append(first, q.right))
    if isinstance(q, Prefix):
        return _replace(p, path, Parallel(Prefix(q.action, False, None, NIL), q.continuation, frozenset()))
    return _replace(p, path, Parallel(q, NIL, gen.sync()))


def _append(p: Process, tail: Process) -> Process:
    if isinstance(p, Nil):
        return tail
    if isinstance(p, Prefix):
        return Prefix(p.action, False, None, _append(p.continuation, tail))
    if isinstance(p, Choice):
        return Choice(_append(p.left, tail), _append(p.right, tail))
    return Parallel(_append(p.left, tail), p.right, p.sync)


def generate_pairs(cfg: GeneratorConfig) -> List[Tuple[Process, Process]]:
    """``cfg.count`` pairs: a third independent, the rest a process and a rewrite of it."""
    rng = random.Random(cfg.seed)
    gen = _Gen(cfg, rng)
    out: List[Tuple[Process, Process]] = []
    attempts = 0
    while len(out) < cfg.count:
        attempts += 1
        if attempts > cfg.budget_factor * max(cfg.count, 1):
            raise GeneratorExhausted(f"only {len(out)} of {cfg.count} pairs after {attempts - 1} attempts")
        p1 = gen.process()
        p2 = gen.process() if rng.random() < 1 / 3 else _variant(p1, gen)
        if cfg.local_only and not (_is_local(p1) and _is_local(p2)):
            continue
        out.append((p1, p2))
    return out


# Cross-validation

@dataclass
class Disagreement:
    p1: str
    p2: str
    hhpb: bool
    frb: bool
    nonlocal_: Tuple[bool, bool]

    def to_json(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "hhpb": self.hhpb, "frbBrm": self.frb,
                "nonLocal": list(self.nonlocal_)}


@dataclass
class CrossValidationReport:
    pairs_checked: int = 0
    agreements: int = 0
    disagreements: int = 0
    dumps: List[Disagreement] = field(default_factory=list)
    equivalent_pairs: int = 0

    def to_json(self) -> dict:
        return {"pairsChecked": self.pairs_checked, "agreements": self.agreements,
                "disagreements": self.disagreements, "equivalentPairs": self.equivalent_pairs,
                "dumps": [d.to_json() for d in self.dumps]}


def check_pair(pair: Tuple[Process, Process]) -> Tuple[bool, bool]:
    p1, p2 = pair
    return hhpb(scs(p1), scs(p2), check=False).verdict, frb_brm_proc(p1, p2).verdict


def cross_validate(pairs: Sequence[Tuple[Process, Process]], workers: Optional[int] = None) -> CrossValidationReport:
    """Compare hhpb on denotations with frb-brm on processes for every pair."""
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(check_pair, pairs, chunksize=4))
    else:
        verdicts = [check_pair(pr) for pr in pairs]
    rep = CrossValidationReport()
    for (p1, p2), (h, f) in zip(pairs, verdicts):
        rep.pairs_checked += 1
        rep.equivalent_pairs += h and f
        if h == f:
            rep.agreements += 1
        else:
            rep.disagreements += 1
            rep.dumps.append(Disagreement(print_process(p1), print_process(p2), h, f,
                                          (not _is_local(p1), not _is_local(p2))))
    return rep
