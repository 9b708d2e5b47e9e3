"""Command-line front end: ``truecon <command> ...``.

Exit status: 0 when the answer is yes (equivalent, satisfied, valid), 1 when
it is no, 2 on malformed input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import fixture_path
from .equivalences import frb_brm_proc, frb_brm_scs, hhpb
from .harness import GeneratorConfig, cross_validate, generate_pairs
from .logics.checking import NotPermissible, mc_brm_process, mc_brm_scs, mc_eil_process, mc_eil_scs
from .logics.formulas import FormulaError, format_formula, parse_formula
from .logics.translation import TranslationError, translate_brm_to_eil
from .semantics import StateCapExceeded, brm_process, build_lts, history_configuration
from .structures import (
    Denotation, denote, event_key, is_conflict_local, load_scs, scs, scs_to_json, validate_stable,
)
from .syntax import ParseError, is_initial, is_well_formed, parse_process, parse_term, print_process, to_initial
from .terms import format_term


class UsageError(ValueError):
    pass


# Inputs

def _process(text: str):
    """A process expression, or ``@name`` for a bundled fixture."""
    if text.startswith("@"):
        with open(fixture_path("processes.json")) as fh:
            table = json.load(fh)
        if text[1:] not in table:
            raise UsageError(f"unknown process fixture {text!r}; known: {', '.join(sorted(table))}")
        text = table[text[1:]]
    p = parse_process(text)
    if not is_well_formed(p):
        raise UsageError(f"process is not well formed: {text}")
    return p


def _scs_file(path: str):
    if not os.path.exists(path):
        bundled = fixture_path(os.path.basename(path))
        if os.path.exists(bundled):
            path = bundled
    return load_scs(path)


def split_top(text: str) -> List[str]:
    """Split on commas that are not nested inside brackets of a proof term."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "[<(":
            depth += 1
        elif ch in "]>)":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur).strip())
    return parts


def _bindings(text: Optional[str], as_term: bool) -> dict:
    env = {}
    for item in split_top(text or ""):
        name, sep, value = item.partition("=")
        if not sep or not name.strip() or not value.strip():
            raise UsageError(f"malformed binding {item!r}; expected x=EVENTID")
        env[name.strip()] = parse_term(value.strip()) if as_term else value.strip()
    return env


def _emit(args, data: dict, text: str):
    if getattr(args, "json", False):
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text)


# Commands

def cmd_parse(args) -> int:
    p = parse_process(args.process)
    wf = is_well_formed(p)
    data = {"process": print_process(p), "wellFormed": wf, "initial": is_initial(p)}
    _emit(args, data, f"{print_process(p)}\nwell-formed: {wf}\ninitial: {is_initial(p)}")
    return 0 if wf else 1


def cmd_lts(args) -> int:
    p = _process(args.process)
    lts = build_lts(to_initial(p))
    if args.format == "dot":
        print(lts.to_dot())
        return 0
    data = lts.to_json()
    data["current"] = lts.state_id(p)
    lines = [f"{len(lts.states)} states, {len(lts.edges)} edges, "
             f"{len(lts.maximal_paths())} maximal paths"]
    lines += [f"  {i}: {print_process(s)}" for i, s in enumerate(lts.states)]
    lines += [f"  {i} --{format_term(t)}--> {j}" for i, t, j in lts.edges]
    _emit(args, data, "\n".join(lines))
    return 0


def _denotation_text(c, cursor) -> str:
    lines = [f"{len(c.events)} events, {len(c.masks)} configurations"]
    lines += [f"  {event_key(e)} : {c.labels[e]}" for e in c.events]
    cur = sorted(event_key(e) for e in cursor)
    lines.append("cursor: {" + ", ".join(cur) + "}")
    return "\n".join(lines)


def cmd_denote(args) -> int:
    p = _process(args.process)
    d = denote(p)
    _emit(args, scs_to_json(d.structure, d.cursor), _denotation_text(d.structure, d.cursor))
    return 0


def cmd_brm(args) -> int:
    p = _process(args.process)
    m = brm_process(p)
    _emit(args, {"process": print_process(p), "brm": str(m), "multiset": dict(m)}, str(m))
    return 0


def _structure(args):
    if args.scs:
        c, _ = _scs_file(args.scs)
        return c
    if args.proc:
        return scs(to_initial(_process(args.proc)))
    raise UsageError("give --scs FILE or --proc EXPR")


def cmd_stable(args) -> int:
    c = _structure(args)
    rep = validate_stable(c)
    data = {"stable": rep.ok, "violations": list(rep.violations)}
    _emit(args, data, "stable" if rep.ok else "not stable:\n" + "\n".join(f"  {v}" for v in rep.violations))
    return 0 if rep.ok else 1


def cmd_locality(args) -> int:
    c = _structure(args)
    ok, clique = is_conflict_local(c, strict=args.strict)
    wit = sorted(event_key(e) for e in clique) if clique else None
    data = {"conflictLocal": ok, "witness": wit}
    _emit(args, data, "conflict-local" if ok else "not conflict-local; clique {" + ", ".join(wit) + "}")
    return 0 if ok else 1


def cmd_check(args) -> int:
    if args.proc:
        p1, p2 = (_process(x) for x in args.proc)
        if args.relation == "frb-brm":
            w = frb_brm_proc(p1, p2)
        else:
            d1, d2 = denote(p1), denote(p2)
            w = hhpb(d1.structure, d2.structure)
    elif args.scs:
        (c1, x1), (c2, x2) = (_scs_file(x) for x in args.scs)
        if args.relation == "frb-brm":
            w = frb_brm_scs(c1, c2, x1 or frozenset(), x2 or frozenset())
        else:
            w = hhpb(c1, c2)
    else:
        raise UsageError("give --proc E1 E2 or --scs F1 F2")
    lines = ["equivalent" if w.verdict else "not equivalent"]
    if not w.verdict:
        if w.trace:
            lines.append("trace: " + " ".join(f"{d}:{a}" for d, a in w.trace))
        if "brm" in w.details:
            lines.append(f"brm mismatch: {w.details['brm'][0]} vs {w.details['brm'][1]}")
        if w.formula is not None:
            lines.append(f"distinguishing formula: {format_formula(w.formula)}")
    _emit(args, w.to_json(), "\n".join(lines))
    return 0 if w.verdict else 1


def cmd_mc(args) -> int:
    f = parse_formula(args.formula, args.logic)
    if args.proc:
        p = _process(args.proc)
        if args.logic == "brm":
            if args.env:
                raise UsageError("--env applies to eil only")
            ok = mc_brm_process(p, f)
        else:
            ok = mc_eil_process(p, _bindings(args.env, as_term=True), f)
    elif args.scs:
        c, cursor = _scs_file(args.scs)
        if args.config is not None:
            cursor = frozenset(split_top(args.config))
        cursor = cursor or frozenset()
        if cursor not in c:
            raise UsageError("configuration is not in the structure")
        if args.logic == "brm":
            ok = mc_brm_scs(Denotation(c, cursor), f)
        else:
            ok = mc_eil_scs(c, cursor, _bindings(args.env, as_term=False), f)
    else:
        raise UsageError("give --proc EXPR or --scs FILE")
    _emit(args, {"formula": format_formula(f), "satisfied": ok}, "satisfied" if ok else "not satisfied")
    return 0 if ok else 1


def cmd_translate(args) -> int:
    f = parse_formula(args.formula, "brm")
    actions = split_top(args.actions or "")
    history = []
    for item in split_top(args.history or ""):
        x, sep, a = item.partition(":")
        if not sep or not x.strip() or not a.strip():
            raise UsageError(f"malformed history entry {item!r}; expected x:a")
        history.append((x.strip(), a.strip()))
    g = translate_brm_to_eil(f, actions, history)
    _emit(args, {"brm": format_formula(f), "eil": format_formula(g)}, format_formula(g))
    return 0


def cmd_xvalidate(args) -> int:
    cfg = GeneratorConfig(seed=args.seed, count=args.count, max_prefix_depth=args.max_depth,
                          max_parallel_width=args.max_width, max_actions=args.max_actions,
                          local_only=args.local_only)
    rep = cross_validate(generate_pairs(cfg), workers=args.workers)
    lines = [f"pairs checked: {rep.pairs_checked}", f"agreements: {rep.agreements}",
             f"disagreements: {rep.disagreements}", f"equivalent pairs: {rep.equivalent_pairs}"]
    for d in rep.dumps:
        lines.append(f"  {d.p1}  vs  {d.p2}: hhpb={d.hhpb} frb-brm={d.frb} non-local={list(d.nonlocal_)}")
    _emit(args, rep.to_json(), "\n".join(lines))
    explained = all(any(d.nonlocal_) for d in rep.dumps)
    return 0 if explained and (not args.local_only or rep.disagreements == 0) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="truecon", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("parse", cmd_parse, "parse and pretty-print a process")
    sp.add_argument("process")
    sp = add("lts", cmd_lts, "proved transition system of a process")
    sp.add_argument("process")
    sp.add_argument("--format", choices=["text", "dot"], default="text")
    sp = add("denote", cmd_denote, "configuration structure and cursor of a process")
    sp.add_argument("process")
    sp = add("brm", cmd_brm, "backward ready multiset of a process")
    sp.add_argument("process")
    for name, fn, help_ in (("stable", cmd_stable, "check stability of a structure"),
                            ("locality", cmd_locality, "check conflict locality of a structure")):
        sp = add(name, fn, help_)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--scs", metavar="FILE")
        g.add_argument("--proc", metavar="EXPR")
        if name == "locality":
            sp.add_argument("--strict", action="store_true", help="root cliques count as non-local")
    sp = add("check", cmd_check, "decide an equivalence")
    sp.add_argument("relation", choices=["frb-brm", "hhpb"])
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--proc", nargs=2, metavar=("E1", "E2"))
    g.add_argument("--scs", nargs=2, metavar=("F1", "F2"))
    sp = add("mc", cmd_mc, "model check a formula")
    sp.add_argument("--logic", choices=["brm", "eil"], required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--proc", metavar="P")
    g.add_argument("--scs", metavar="F")
    sp.add_argument("--config", metavar="IDS", help="comma-separated event ids (with --scs)")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--env", metavar="BINDINGS", help="x=EVENTID,...")
    sp = add("translate", cmd_translate, "translate a BRM formula into EIL")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--actions", required=True, help="comma-separated action set")
    sp.add_argument("--history", default="", help="x1:a,x2:b,... oldest first")
    sp = add("xvalidate", cmd_xvalidate, "cross-validate hhpb against frb-brm on random pairs")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--local-only", action="store_true")
    sp.add_argument("--max-depth", type=int, default=3)
    sp.add_argument("--max-width", type=int, default=3)
    sp.add_argument("--max-actions", type=int, default=3)
    sp.add_argument("--workers", type=int, default=None)
    return ap


def run_command(argv: List[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "config", None) is not None and not getattr(args, "scs", None):
        print("error: --config needs --scs", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except (ParseError, FormulaError, TranslationError, NotPermissible, UsageError,
            StateCapExceeded, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv: Optional[List[str]] = None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
